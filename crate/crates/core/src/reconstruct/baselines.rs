//! Interval (TFI) and window-count (TFP) baselines, both causal.

/// `255 / ISI` of the most recent completed interval; 0 until the second spike.
pub(crate) fn tfi_frames(bits: &[u8], out: &mut [f32]) {
    let mut last: Option<usize> = None;
    let mut current = 0.0f32;
    for (n, (&b, o)) in bits.iter().zip(out.iter_mut()).enumerate() {
        if b != 0 {
            if let Some(prev) = last {
                current = (255.0 / (n - prev) as f64) as f32;
            }
            last = Some(n);
        }
        *o = current;
    }
}

/// `255 * spikes / length` over the trailing window ending at each frame.
/// Windows cut short by the start of the stream use their actual length.
pub(crate) fn tfp_frames(bits: &[u8], window: usize, out: &mut [f32]) {
    let mut count = 0usize;
    for n in 0..bits.len() {
        count += bits[n] as usize;
        if n >= window {
            count -= bits[n - window] as usize;
        }
        let len = window.min(n + 1);
        out[n] = (255.0 * count as f64 / len as f64) as f32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tfi_uses_latest_interval() {
        let bits = [0, 1, 0, 1, 0, 0, 0, 1, 0];
        let mut out = [0.0; 9];
        tfi_frames(&bits, &mut out);
        assert_eq!(out, [0.0, 0.0, 0.0, 127.5, 127.5, 127.5, 127.5, 63.75, 63.75]);
    }

    #[test]
    fn tfp_full_window() {
        // 8 spikes in the last 32 frames
        let bits: Vec<u8> = (0..64).map(|n| u8::from(n >= 32 && n % 4 == 0)).collect();
        let mut out = vec![0.0; 64];
        tfp_frames(&bits, 32, &mut out);
        assert_eq!(out[63], 63.75);
    }

    #[test]
    fn tfp_truncated_start() {
        let bits = [1, 0, 1, 0];
        let mut out = [0.0; 4];
        tfp_frames(&bits, 32, &mut out);
        assert_eq!(out, [255.0, 127.5, 170.0, 127.5]);
    }
}
