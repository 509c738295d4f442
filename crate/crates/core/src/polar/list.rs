//! Successive-cancellation list decoding in the LLR domain.
//!
//! Memory follows the lazy-copy layout of Tal and Vardy: every layer `λ`
//! keeps a pool of `L` arrays of length `2^(n-λ)`, paths hold references to
//! pool slots and a slot is copied only when a path that shares it needs to
//! write. Layer 0 is the channel and is never written.
//!
//! The path metric adds `|λ|` whenever a decision disagrees with the sign of
//! its LLR, and check nodes use the min-sum rule. With those two choices the
//! final metric of a path is the correlation discrepancy of its codeword, so
//! a list that never prunes returns the maximum-likelihood codeword.

use super::{crc_check, polar_transform, ComponentCode};
use crate::Bit;

#[inline]
fn f_minsum(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

#[inline]
fn g_combine(a: f64, b: f64, u: u8) -> f64 {
    if u == 0 {
        b + a
    } else {
        b - a
    }
}

#[inline]
fn hard(llr: f64) -> Bit {
    (llr < 0.0) as Bit
}

#[inline]
fn penalty(llr: f64, bit: Bit) -> f64 {
    if bit != hard(llr) {
        llr.abs()
    } else {
        0.0
    }
}

/// Result of decoding one component code.
#[derive(Debug, Clone, PartialEq)]
pub struct ListOutput {
    /// Decoded payload (information bits without the CRC).
    pub payload: Vec<Bit>,
    /// Decoded `u` vector, frozen positions included.
    pub u: Vec<Bit>,
    /// Re-encoded codeword of the selected path.
    pub codeword: Vec<Bit>,
    /// Whether the selected path passed the CRC; true when the code has none.
    pub crc_ok: bool,
    /// Path metric of the selected path.
    pub metric: f64,
}

/// Reusable CA-SCL decoder for one blocklength and list size.
#[derive(Debug, Clone)]
pub struct ListDecoder {
    list_size: usize,
    log_n: usize,
    // per layer (index 0 unused): flat pools of `list_size` arrays
    llr: Vec<Vec<f64>>,
    bits: Vec<Vec<[u8; 2]>>,
    refcount: Vec<Vec<usize>>,
    free_slots: Vec<Vec<usize>>,
    path_slot: Vec<Vec<usize>>,
    active: Vec<bool>,
    free_paths: Vec<usize>,
    metric: Vec<f64>,
    u_hat: Vec<Vec<Bit>>,
    candidates: Vec<(f64, usize, Bit)>,
    trace: Option<Vec<(f64, f64)>>,
}

impl ListDecoder {
    /// Decoder for codes of length `n` with up to `list_size` paths.
    pub fn new(n: usize, list_size: usize) -> Self {
        assert!(n.is_power_of_two(), "polar length must be a power of two");
        assert!(
            list_size >= 1 && list_size.is_power_of_two(),
            "list size must be a power of two"
        );
        let log_n = n.trailing_zeros() as usize;
        let layer_len = |layer: usize| 1usize << (log_n - layer);
        Self {
            list_size,
            log_n,
            llr: (0..=log_n).map(|l| if l == 0 { Vec::new() } else { vec![0.0; list_size * layer_len(l)] }).collect(),
            bits: (0..=log_n).map(|l| if l == 0 { Vec::new() } else { vec![[0; 2]; list_size * layer_len(l)] }).collect(),
            refcount: vec![vec![0; list_size]; log_n + 1],
            free_slots: vec![Vec::with_capacity(list_size); log_n + 1],
            path_slot: vec![vec![0; list_size]; log_n + 1],
            active: vec![false; list_size],
            free_paths: Vec::with_capacity(list_size),
            metric: vec![0.0; list_size],
            u_hat: vec![vec![0; n]; list_size],
            candidates: Vec::with_capacity(2 * list_size),
            trace: None,
        }
    }

    pub fn n(&self) -> usize {
        1 << self.log_n
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    /// Records `(parent metric, child metric)` for every path extension.
    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn take_trace(&mut self) -> Vec<(f64, f64)> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn layer_len(&self, layer: usize) -> usize {
        1 << (self.log_n - layer)
    }

    fn reset(&mut self) {
        for layer in 1..=self.log_n {
            self.refcount[layer].iter_mut().for_each(|r| *r = 0);
            self.free_slots[layer].clear();
            self.free_slots[layer].extend((0..self.list_size).rev());
        }
        self.active.iter_mut().for_each(|a| *a = false);
        self.free_paths.clear();
        self.free_paths.extend((0..self.list_size).rev());
    }

    fn assign_initial_path(&mut self) -> usize {
        let path = self.free_paths.pop().expect("free path");
        self.active[path] = true;
        self.metric[path] = 0.0;
        for layer in 1..=self.log_n {
            let slot = self.free_slots[layer].pop().expect("free slot");
            self.path_slot[layer][path] = slot;
            self.refcount[layer][slot] = 1;
        }
        path
    }

    fn clone_path(&mut self, path: usize, phase: usize) -> usize {
        let twin = self.free_paths.pop().expect("free path");
        self.active[twin] = true;
        self.metric[twin] = self.metric[path];
        for layer in 1..=self.log_n {
            let slot = self.path_slot[layer][path];
            self.path_slot[layer][twin] = slot;
            self.refcount[layer][slot] += 1;
        }
        let (src, dst) = if path < twin {
            let (a, b) = self.u_hat.split_at_mut(twin);
            (&a[path], &mut b[0])
        } else {
            let (a, b) = self.u_hat.split_at_mut(path);
            (&b[0], &mut a[twin])
        };
        dst[..phase].copy_from_slice(&src[..phase]);
        twin
    }

    fn kill_path(&mut self, path: usize) {
        self.active[path] = false;
        self.free_paths.push(path);
        for layer in 1..=self.log_n {
            let slot = self.path_slot[layer][path];
            self.refcount[layer][slot] -= 1;
            if self.refcount[layer][slot] == 0 {
                self.free_slots[layer].push(slot);
            }
        }
    }

    /// Slot of `path` at `layer`, made private to the path.
    fn writable(&mut self, layer: usize, path: usize) -> usize {
        let slot = self.path_slot[layer][path];
        if self.refcount[layer][slot] == 1 {
            return slot;
        }
        let fresh = self.free_slots[layer].pop().expect("free slot");
        let len = self.layer_len(layer);
        self.llr[layer].copy_within(slot * len..(slot + 1) * len, fresh * len);
        self.bits[layer].copy_within(slot * len..(slot + 1) * len, fresh * len);
        self.refcount[layer][slot] -= 1;
        self.refcount[layer][fresh] = 1;
        self.path_slot[layer][path] = fresh;
        fresh
    }

    fn calc_llr(&mut self, channel: &[f64], layer: usize, phase: usize) {
        if layer == 0 {
            return;
        }
        if phase.is_multiple_of(2) {
            self.calc_llr(channel, layer - 1, phase >> 1);
        }
        let half = self.layer_len(layer);
        for path in 0..self.list_size {
            if !self.active[path] {
                continue;
            }
            let slot = self.writable(layer, path);
            let (lower, upper) = self.llr.split_at_mut(layer);
            let out = &mut upper[0][slot * half..(slot + 1) * half];
            let input: &[f64] = if layer == 1 {
                channel
            } else {
                let s = self.path_slot[layer - 1][path];
                &lower[layer - 1][s * 2 * half..(s + 1) * 2 * half]
            };
            if phase.is_multiple_of(2) {
                for (beta, o) in out.iter_mut().enumerate() {
                    *o = f_minsum(input[beta], input[beta + half]);
                }
            } else {
                let decided = &self.bits[layer][slot * half..(slot + 1) * half];
                for (beta, o) in out.iter_mut().enumerate() {
                    *o = g_combine(input[beta], input[beta + half], decided[beta][0]);
                }
            }
        }
    }

    fn update_bits(&mut self, layer: usize, phase: usize) {
        debug_assert!(phase % 2 == 1);
        if layer <= 1 {
            return;
        }
        let psi = phase >> 1;
        let half = self.layer_len(layer);
        for path in 0..self.list_size {
            if !self.active[path] {
                continue;
            }
            let src = self.path_slot[layer][path];
            let dst = self.writable(layer - 1, path);
            let (lower, upper) = self.bits.split_at_mut(layer);
            let from = &upper[0][src * half..(src + 1) * half];
            let to = &mut lower[layer - 1][dst * 2 * half..(dst + 1) * 2 * half];
            for beta in 0..half {
                to[beta][psi & 1] = from[beta][0] ^ from[beta][1];
                to[beta + half][psi & 1] = from[beta][1];
            }
        }
        if psi % 2 == 1 {
            self.update_bits(layer - 1, psi);
        }
    }

    fn leaf_llr(&self, channel: &[f64], path: usize) -> f64 {
        if self.log_n == 0 {
            channel[0]
        } else {
            self.llr[self.log_n][self.path_slot[self.log_n][path]]
        }
    }

    fn set_leaf(&mut self, path: usize, phase: usize, bit: Bit, llr: f64) {
        let next = self.metric[path] + penalty(llr, bit);
        if let Some(trace) = self.trace.as_mut() {
            trace.push((self.metric[path], next));
        }
        self.metric[path] = next;
        self.u_hat[path][phase] = bit;
        if self.log_n > 0 {
            let slot = self.writable(self.log_n, path);
            self.bits[self.log_n][slot][phase & 1] = bit;
        }
    }

    fn extend_unfrozen(&mut self, channel: &[f64], phase: usize) {
        self.candidates.clear();
        for path in 0..self.list_size {
            if self.active[path] {
                let llr = self.leaf_llr(channel, path);
                for bit in 0..2 {
                    self.candidates.push((self.metric[path] + penalty(llr, bit), path, bit));
                }
            }
        }
        self.candidates
            .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let keep = self.candidates.len().min(self.list_size);
        let mut survive = vec![[false; 2]; self.list_size];
        for &(_, path, bit) in &self.candidates[..keep] {
            survive[path][bit as usize] = true;
        }
        for (path, s) in survive.iter().enumerate() {
            if self.active[path] && !s[0] && !s[1] {
                self.kill_path(path);
            }
        }
        for (path, s) in survive.iter().enumerate() {
            if !self.active[path] || !(s[0] || s[1]) {
                continue;
            }
            let llr = self.leaf_llr(channel, path);
            if s[0] && s[1] {
                let twin = self.clone_path(path, phase);
                self.set_leaf(twin, phase, 1, llr);
                self.set_leaf(path, phase, 0, llr);
            } else {
                self.set_leaf(path, phase, if s[0] { 0 } else { 1 }, llr);
            }
        }
    }

    /// Decodes `llrs` (positive favours 0) for `code`.
    pub fn decode(&mut self, llrs: &[f64], code: &ComponentCode) -> ListOutput {
        let n = self.n();
        assert_eq!(llrs.len(), n, "LLR vector length");
        assert_eq!(code.n(), n, "code length");
        self.reset();
        self.assign_initial_path();
        let frozen = code.frozen_mask();
        for (phase, &is_frozen) in frozen.iter().enumerate() {
            self.calc_llr(llrs, self.log_n, phase);
            if is_frozen {
                for path in 0..self.list_size {
                    if self.active[path] {
                        let llr = self.leaf_llr(llrs, path);
                        self.set_leaf(path, phase, 0, llr);
                    }
                }
            } else {
                self.extend_unfrozen(llrs, phase);
            }
            if phase % 2 == 1 {
                self.update_bits(self.log_n, phase);
            }
        }
        self.select(code)
    }

    fn select(&self, code: &ComponentCode) -> ListOutput {
        let mut order: Vec<usize> = (0..self.list_size).filter(|&p| self.active[p]).collect();
        order.sort_by(|&a, &b| self.metric[a].total_cmp(&self.metric[b]).then(a.cmp(&b)));
        let passes = |p: usize| code.crc_len() == 0 || crc_check(&code.extract_info(&self.u_hat[p]));
        let (chosen, crc_ok) = match order.iter().find(|&&p| passes(p)) {
            Some(&p) => (p, true),
            None => (order[0], false),
        };
        let u = self.u_hat[chosen].clone();
        let info = code.extract_info(&u);
        let mut codeword = u.clone();
        polar_transform(&mut codeword);
        ListOutput {
            payload: info[..code.payload_len()].to_vec(),
            u,
            codeword,
            crc_ok,
            metric: self.metric[chosen],
        }
    }
}

/// Plain successive-cancellation decoding; returns `u`.
pub fn sc_decode(llrs: &[f64], frozen: &[bool]) -> Vec<Bit> {
    assert_eq!(llrs.len(), frozen.len());
    assert!(llrs.len().is_power_of_two());
    let mut u = vec![0; llrs.len()];
    sc_node(llrs, frozen, &mut u);
    u
}

fn sc_node(llrs: &[f64], frozen: &[bool], u: &mut [Bit]) -> Vec<Bit> {
    if llrs.len() == 1 {
        u[0] = if frozen[0] { 0 } else { hard(llrs[0]) };
        return vec![u[0]];
    }
    let half = llrs.len() / 2;
    let left: Vec<f64> = (0..half).map(|i| f_minsum(llrs[i], llrs[i + half])).collect();
    let a = sc_node(&left, &frozen[..half], &mut u[..half]);
    let right: Vec<f64> = (0..half).map(|i| g_combine(llrs[i], llrs[i + half], a[i])).collect();
    let b = sc_node(&right, &frozen[half..], &mut u[half..]);
    let mut x: Vec<Bit> = a.iter().zip(&b).map(|(p, q)| p ^ q).collect();
    x.extend_from_slice(&b);
    x
}
