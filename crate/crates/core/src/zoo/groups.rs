//! Built-in group models.

use super::{Element, GroupModel, SharedGroup};
use crate::error::{Error, Result};
use crate::metric::format_coords;

fn letter(i: usize) -> char {
    (b'a' + i as u8) as char
}

fn power(name: &str, e: i64) -> String {
    if e == 1 {
        name.to_string()
    } else {
        format!("{name}^{e}")
    }
}

fn repeat(s: usize, count: i64, inv: usize) -> impl Iterator<Item = usize> {
    let g = if count >= 0 { s } else { inv };
    std::iter::repeat_n(g, count.unsigned_abs() as usize)
}

/// `Z^n` with the standard basis; element = coordinates.
#[derive(Clone, Debug)]
pub struct Zn {
    pub n: usize,
}

impl GroupModel for Zn {
    fn name(&self) -> String {
        format!("zn:{}", self.n)
    }
    fn generators(&self) -> Vec<String> {
        (0..self.n)
            .flat_map(|i| [format!("+x{i}"), format!("-x{i}")])
            .collect()
    }
    fn inverse_generator(&self, s: usize) -> usize {
        s ^ 1
    }
    fn identity(&self) -> Element {
        vec![0; self.n]
    }
    fn multiply(&self, g: &Element, s: usize) -> Element {
        let mut out = g.clone();
        out[s / 2] += if s.is_multiple_of(2) { 1 } else { -1 };
        out
    }
    fn word(&self, g: &Element) -> Vec<usize> {
        g.iter()
            .enumerate()
            .flat_map(|(i, &x)| repeat(2 * i, x, 2 * i + 1))
            .collect()
    }
    fn label(&self, g: &Element) -> String {
        format_coords(g)
    }
    fn convex_balls(&self) -> bool {
        true
    }
    fn lattice_dim(&self) -> Option<usize> {
        Some(self.n)
    }
}

/// `Z` generated by `{±s : s in steps}`; `1` must be a step.
#[derive(Clone, Debug)]
pub struct ZGens {
    steps: Vec<i64>,
}

impl ZGens {
    pub fn new(mut steps: Vec<i64>) -> Result<Self> {
        steps.sort_unstable();
        steps.dedup();
        if steps.first() != Some(&1) || steps.iter().any(|&s| s < 1) {
            return Err(Error::invalid(
                "generating steps must be positive and include 1",
            ));
        }
        Ok(ZGens { steps })
    }
}

impl GroupModel for ZGens {
    fn name(&self) -> String {
        let s: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        format!("z:{}", s.join(","))
    }
    fn generators(&self) -> Vec<String> {
        self.steps
            .iter()
            .flat_map(|s| [format!("+{s}"), format!("-{s}")])
            .collect()
    }
    fn inverse_generator(&self, s: usize) -> usize {
        s ^ 1
    }
    fn identity(&self) -> Element {
        vec![0]
    }
    fn multiply(&self, g: &Element, s: usize) -> Element {
        let step = self.steps[s / 2];
        vec![g[0] + if s.is_multiple_of(2) { step } else { -step }]
    }
    fn word(&self, g: &Element) -> Vec<usize> {
        let mut rest = g[0].abs();
        let sign = usize::from(g[0] < 0);
        let mut out = Vec::new();
        for (i, &s) in self.steps.iter().enumerate().rev() {
            while rest >= s {
                out.push(2 * i + sign);
                rest -= s;
            }
        }
        out
    }
    fn label(&self, g: &Element) -> String {
        format_coords(g)
    }
    fn convex_balls(&self) -> bool {
        true
    }
}

/// Free group on `k` letters; element = reduced word with letter `i`
/// encoded as `i+1` and its inverse as `-(i+1)`.
#[derive(Clone, Debug)]
pub struct Free {
    pub k: usize,
}

impl GroupModel for Free {
    fn name(&self) -> String {
        format!("fk:{}", self.k)
    }
    fn generators(&self) -> Vec<String> {
        (0..self.k)
            .flat_map(|i| {
                [
                    letter(i).to_string(),
                    letter(i).to_ascii_uppercase().to_string(),
                ]
            })
            .collect()
    }
    fn inverse_generator(&self, s: usize) -> usize {
        s ^ 1
    }
    fn identity(&self) -> Element {
        Vec::new()
    }
    fn multiply(&self, g: &Element, s: usize) -> Element {
        let x = (s / 2 + 1) as i64 * if s.is_multiple_of(2) { 1 } else { -1 };
        let mut out = g.clone();
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
        out
    }
    fn word(&self, g: &Element) -> Vec<usize> {
        g.iter()
            .map(|&x| 2 * (x.unsigned_abs() as usize - 1) + usize::from(x < 0))
            .collect()
    }
    fn label(&self, g: &Element) -> String {
        if g.is_empty() {
            return "e".into();
        }
        g.iter()
            .map(|&x| {
                let c = letter(x.unsigned_abs() as usize - 1);
                if x > 0 {
                    c
                } else {
                    c.to_ascii_uppercase()
                }
            })
            .collect()
    }
    fn convex_balls(&self) -> bool {
        true
    }
}

/// Cyclic group of order `n >= 1`.
#[derive(Clone, Debug)]
pub struct Cyclic {
    pub n: i64,
}

impl GroupModel for Cyclic {
    fn name(&self) -> String {
        if self.n == 1 {
            "trivial".into()
        } else {
            format!("cyclic:{}", self.n)
        }
    }
    fn generators(&self) -> Vec<String> {
        match self.n {
            1 => Vec::new(),
            2 => vec!["+1".into()],
            _ => vec!["+1".into(), "-1".into()],
        }
    }
    fn inverse_generator(&self, s: usize) -> usize {
        if self.n == 2 {
            s
        } else {
            s ^ 1
        }
    }
    fn identity(&self) -> Element {
        vec![0]
    }
    fn multiply(&self, g: &Element, s: usize) -> Element {
        let d = if s == 0 { 1 } else { -1 };
        vec![(g[0] + d).rem_euclid(self.n)]
    }
    fn word(&self, g: &Element) -> Vec<usize> {
        vec![0; g[0] as usize]
    }
    fn label(&self, g: &Element) -> String {
        g[0].to_string()
    }
}

/// Symmetric group on `n` letters generated by adjacent transpositions;
/// element = image list.
#[derive(Clone, Debug)]
pub struct Symmetric {
    pub n: usize,
}

impl GroupModel for Symmetric {
    fn name(&self) -> String {
        format!("sym:{}", self.n)
    }
    fn generators(&self) -> Vec<String> {
        (0..self.n.saturating_sub(1))
            .map(|i| format!("s{i}"))
            .collect()
    }
    fn inverse_generator(&self, s: usize) -> usize {
        s
    }
    fn identity(&self) -> Element {
        (0..self.n as i64).collect()
    }
    fn multiply(&self, g: &Element, s: usize) -> Element {
        let mut out = g.clone();
        out.swap(s, s + 1);
        out
    }
    fn word(&self, g: &Element) -> Vec<usize> {
        // bubble sort by right multiplication, then read the swaps backwards
        let mut p = g.clone();
        let mut swaps = Vec::new();
        for end in (1..p.len()).rev() {
            for i in 0..end {
                if p[i] > p[i + 1] {
                    p.swap(i, i + 1);
                    swaps.push(i);
                }
            }
        }
        swaps.reverse();
        swaps
    }
    fn label(&self, g: &Element) -> String {
        let parts: Vec<String> = g.iter().map(|x| x.to_string()).collect();
        format!("[{}]", parts.join(" "))
    }
}

/// Direct product; element = `[len(g), g.., h..]`.
#[derive(Clone, Debug)]
pub struct Product {
    pub left: SharedGroup,
    pub right: SharedGroup,
}

impl Product {
    fn split<'a>(&self, g: &'a Element) -> (&'a [i64], &'a [i64]) {
        let k = g[0] as usize;
        (&g[1..1 + k], &g[1 + k..])
    }

    fn join(g: Element, h: Element) -> Element {
        let mut out = vec![g.len() as i64];
        out.extend(g);
        out.extend(h);
        out
    }
}

impl GroupModel for Product {
    fn name(&self) -> String {
        format!("product:{}+{}", self.left.name(), self.right.name())
    }
    fn generators(&self) -> Vec<String> {
        let mut g = self.left.generators();
        g.extend(self.right.generators());
        g
    }
    fn inverse_generator(&self, s: usize) -> usize {
        let k = self.left.generators().len();
        if s < k {
            self.left.inverse_generator(s)
        } else {
            k + self.right.inverse_generator(s - k)
        }
    }
    fn identity(&self) -> Element {
        Self::join(self.left.identity(), self.right.identity())
    }
    fn multiply(&self, g: &Element, s: usize) -> Element {
        let k = self.left.generators().len();
        let (a, b) = self.split(g);
        if s < k {
            Self::join(self.left.multiply(&a.to_vec(), s), b.to_vec())
        } else {
            Self::join(a.to_vec(), self.right.multiply(&b.to_vec(), s - k))
        }
    }
    fn word(&self, g: &Element) -> Vec<usize> {
        let k = self.left.generators().len();
        let (a, b) = self.split(g);
        let mut w = self.left.word(&a.to_vec());
        w.extend(self.right.word(&b.to_vec()).into_iter().map(|s| s + k));
        w
    }
    fn label(&self, g: &Element) -> String {
        let (a, b) = self.split(g);
        format!(
            "{}|{}",
            self.left.label(&a.to_vec()),
            self.right.label(&b.to_vec())
        )
    }
}

/// Amalgam `A *_C B` of cyclic groups `A = <a>` of order `p` and
/// `B = <b>` of order `q` (0 = infinite) over a cyclic `C` embedded as
/// `<a^m>` and `<b^n>`. `C` is central, so an element has the normal form
/// `c^k s_1 .. s_r` with alternating coset representatives `a^i`, `b^j`.
///
/// Encoding: `[k, f_1, e_1, f_2, e_2, ..]` with factor `f = 0` for `A`,
/// `1` for `B`.
#[derive(Clone, Debug)]
pub struct Amalgam {
    pub p: i64,
    pub q: i64,
    pub m: i64,
    pub n: i64,
    /// order of `C` (0 = infinite, 1 = trivial)
    c_order: i64,
}

impl Amalgam {
    /// Free product `Z_p * Z_q` (0 = infinite cyclic factor).
    pub fn free_product(p: i64, q: i64) -> Result<Self> {
        Self::new(p, q, p, q)
    }

    pub fn new(p: i64, q: i64, m: i64, n: i64) -> Result<Self> {
        if p < 0 || q < 0 || m < 0 || n < 0 || p == 1 || q == 1 {
            return Err(Error::invalid("factor orders must be 0 or at least 2"));
        }
        let order = |ord: i64, idx: i64| -> Result<i64> {
            match (ord, idx) {
                (0, 0) => Ok(1),
                (0, _) => Ok(0),
                (_, i) if i > 0 && ord % i == 0 => Ok(ord / i),
                _ => Err(Error::invalid(
                    "subgroup index must divide a finite factor order",
                )),
            }
        };
        let (ca, cb) = (order(p, m)?, order(q, n)?);
        if ca != cb {
            return Err(Error::invalid(format!(
                "edge group images have different orders ({ca} vs {cb})"
            )));
        }
        Ok(Amalgam {
            p,
            q,
            m,
            n,
            c_order: ca,
        })
    }

    pub fn edge_trivial(&self) -> bool {
        self.c_order == 1
    }

    fn factor(&self, f: i64) -> (i64, i64) {
        if f == 0 {
            (self.p, self.m)
        } else {
            (self.q, self.n)
        }
    }

    /// Reduced representative of `x^e` in factor `f`, and the `c`-power
    /// split off.
    fn reduce(&self, f: i64, e: i64) -> (i64, i64) {
        let (ord, idx) = self.factor(f);
        if self.edge_trivial() {
            (if ord > 0 { e.rem_euclid(ord) } else { e }, 0)
        } else {
            (e.rem_euclid(idx), e.div_euclid(idx))
        }
    }

    fn add_c(&self, k: i64, t: i64) -> i64 {
        if self.c_order > 0 {
            (k + t).rem_euclid(self.c_order)
        } else {
            k + t
        }
    }

    /// Generator indices of each factor as `(x, x^-1)`; equal for order 2.
    fn gen_layout(&self) -> Vec<(i64, i64)> {
        // (factor, sign) per generator index
        let mut out = Vec::new();
        for f in 0..2 {
            match self.factor(f).0 {
                2 => out.push((f, 1)),
                _ => {
                    out.push((f, 1));
                    out.push((f, -1));
                }
            }
        }
        out
    }

    fn gen_index(&self, f: i64, sign: i64) -> usize {
        let layout = self.gen_layout();
        layout
            .iter()
            .position(|&(g, s)| g == f && s == sign)
            .or_else(|| layout.iter().position(|&(g, _)| g == f))
            .expect("factor has a generator")
    }

    pub fn c_power(g: &Element) -> i64 {
        g[0]
    }

    /// `(factor, exponent)` syllables.
    pub fn syllables(g: &Element) -> Vec<(i64, i64)> {
        g[1..].chunks(2).map(|c| (c[0], c[1])).collect()
    }

    pub fn from_parts(k: i64, syllables: &[(i64, i64)]) -> Element {
        let mut out = vec![k];
        for &(f, e) in syllables {
            out.push(f);
            out.push(e);
        }
        out
    }

    /// Whether `g` lies in the image of `C` (a pure `c`-power).
    pub fn in_edge_group(g: &Element) -> bool {
        g.len() == 1
    }

    /// Whether `g` lies in factor `f`.
    pub fn in_factor(g: &Element, f: i64) -> bool {
        g.len() == 1 || (g.len() == 3 && g[1] == f)
    }
}

impl GroupModel for Amalgam {
    fn name(&self) -> String {
        let fac = |o: i64| {
            if o == 0 {
                "z".to_string()
            } else {
                format!("z{o}")
            }
        };
        if self.edge_trivial() {
            format!("amalgam:{}*{}", fac(self.p), fac(self.q))
        } else {
            format!(
                "amalgam:{}*{}/{},{}",
                fac(self.p),
                fac(self.q),
                self.m,
                self.n
            )
        }
    }
    fn generators(&self) -> Vec<String> {
        self.gen_layout()
            .into_iter()
            .map(|(f, s)| {
                let c = if f == 0 { 'a' } else { 'b' };
                if s > 0 {
                    c.to_string()
                } else {
                    c.to_ascii_uppercase().to_string()
                }
            })
            .collect()
    }
    fn inverse_generator(&self, s: usize) -> usize {
        let (f, sign) = self.gen_layout()[s];
        self.gen_index(f, -sign)
    }
    fn identity(&self) -> Element {
        vec![0]
    }
    fn multiply(&self, g: &Element, s: usize) -> Element {
        let (f, sign) = self.gen_layout()[s];
        let mut out = g.clone();
        let last_is_f = out.len() >= 3 && out[out.len() - 2] == f;
        let e = if last_is_f {
            out[out.len() - 1] + sign
        } else {
            sign
        };
        let (r, t) = self.reduce(f, e);
        if last_is_f {
            out.truncate(out.len() - 2);
        }
        if r != 0 {
            out.push(f);
            out.push(r);
        }
        out[0] = self.add_c(out[0], t);
        out
    }
    fn convex_balls(&self) -> bool {
        // free products of factors whose own balls are convex
        let small = |o: i64| o == 0 || o <= 5;
        self.c_order == 1 && small(self.p) && small(self.q)
    }
    fn word(&self, g: &Element) -> Vec<usize> {
        let mut w = Vec::new();
        let (a, a_inv) = (self.gen_index(0, 1), self.gen_index(0, -1));
        if g[0] != 0 {
            w.extend(repeat(a, g[0] * self.m, a_inv));
        }
        for (f, e) in Self::syllables(g) {
            w.extend(repeat(self.gen_index(f, 1), e, self.gen_index(f, -1)));
        }
        w
    }
    fn label(&self, g: &Element) -> String {
        let mut parts = Vec::new();
        if g[0] != 0 {
            parts.push(power("c", g[0]));
        }
        for (f, e) in Self::syllables(g) {
            parts.push(power(if f == 0 { "a" } else { "b" }, e));
        }
        if parts.is_empty() {
            "e".into()
        } else {
            parts.join(" ")
        }
    }
}

/// Baumslag–Solitar group `<a, t | t^-1 a^p t = a^q>` as an HNN extension
/// of `<a>`, in Britton normal form
/// `a^e0 t^s1 a^e1 .. t^sk a^ek` encoded `[e0, s1, e1, .., sk, ek]`:
/// an exponent followed by `t` lies in `[0, p)`, one followed by `t^-1`
/// in `[0, q)`.
#[derive(Clone, Debug)]
pub struct Hnn {
    pub p: i64,
    pub q: i64,
}

impl Hnn {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p < 1 || q < 1 {
            return Err(Error::invalid("HNN exponents must be positive"));
        }
        Ok(Hnn { p, q })
    }

    pub fn t_letters(g: &Element) -> usize {
        g.len() / 2
    }

    /// Drops the last stable letter and the exponent after it.
    pub fn prefix(g: &Element) -> Element {
        g[..g.len() - 2].to_vec()
    }

    pub fn in_vertex_group(g: &Element) -> bool {
        g.len() == 1
    }
}

impl GroupModel for Hnn {
    fn name(&self) -> String {
        format!("bs:{},{}", self.p, self.q)
    }
    fn generators(&self) -> Vec<String> {
        vec!["a".into(), "A".into(), "t".into(), "T".into()]
    }
    fn inverse_generator(&self, s: usize) -> usize {
        s ^ 1
    }
    fn identity(&self) -> Element {
        vec![0]
    }
    fn multiply(&self, g: &Element, s: usize) -> Element {
        let mut out = g.clone();
        let last = out.len() - 1;
        match s {
            0 => out[last] += 1,
            1 => out[last] -= 1,
            _ => {
                let eps = if s == 2 { 1 } else { -1 };
                let (div, other) = if eps == 1 {
                    (self.p, self.q)
                } else {
                    (self.q, self.p)
                };
                let e = out[last];
                let (r, j) = (e.rem_euclid(div), e.div_euclid(div));
                if r == 0 && out.len() >= 3 && out[last - 1] == -eps {
                    out.truncate(last - 1);
                    let l = out.len() - 1;
                    out[l] += other * j;
                } else {
                    out[last] = r;
                    out.push(eps);
                    out.push(other * j);
                }
            }
        }
        out
    }
    fn word(&self, g: &Element) -> Vec<usize> {
        let mut w: Vec<usize> = repeat(0, g[0], 1).collect();
        for c in g[1..].chunks(2) {
            w.push(if c[0] == 1 { 2 } else { 3 });
            w.extend(repeat(0, c[1], 1));
        }
        w
    }
    fn label(&self, g: &Element) -> String {
        let mut parts = Vec::new();
        if g[0] != 0 {
            parts.push(power("a", g[0]));
        }
        for c in g[1..].chunks(2) {
            parts.push(if c[0] == 1 { "t".into() } else { "T".into() });
            if c[1] != 0 {
                parts.push(power("a", c[1]));
            }
        }
        if parts.is_empty() {
            "e".into()
        } else {
            parts.join(" ")
        }
    }
}

/// Lamplighter `Z_2 wr Z`; element = `[cursor, lit lamps ascending..]`.
#[derive(Clone, Debug)]
pub struct Lamplighter;

impl GroupModel for Lamplighter {
    fn name(&self) -> String {
        "lamplighter".into()
    }
    fn generators(&self) -> Vec<String> {
        vec!["t".into(), "T".into(), "l".into()]
    }
    fn inverse_generator(&self, s: usize) -> usize {
        [1, 0, 2][s]
    }
    fn identity(&self) -> Element {
        vec![0]
    }
    fn multiply(&self, g: &Element, s: usize) -> Element {
        let mut out = g.clone();
        match s {
            0 => out[0] += 1,
            1 => out[0] -= 1,
            _ => {
                let c = out[0];
                match out[1..].binary_search(&c) {
                    Ok(i) => {
                        out.remove(i + 1);
                    }
                    Err(i) => out.insert(i + 1, c),
                }
            }
        }
        out
    }
    fn word(&self, g: &Element) -> Vec<usize> {
        let mut w = Vec::new();
        let mut cur = 0;
        for &lamp in &g[1..] {
            w.extend(repeat(0, lamp - cur, 1));
            w.push(2);
            cur = lamp;
        }
        w.extend(repeat(0, g[0] - cur, 1));
        w
    }
    fn label(&self, g: &Element) -> String {
        let lamps: Vec<String> = g[1..].iter().map(|x| x.to_string()).collect();
        format!("{}:{{{}}}", g[0], lamps.join(","))
    }
}

/// `Z wr Z`; element = `[cursor, pos_1, val_1, ..]` with nonzero values
/// at ascending positions.
#[derive(Clone, Debug)]
pub struct ZWreathZ;

impl GroupModel for ZWreathZ {
    fn name(&self) -> String {
        "zwrz".into()
    }
    fn generators(&self) -> Vec<String> {
        vec!["t".into(), "T".into(), "l".into(), "L".into()]
    }
    fn inverse_generator(&self, s: usize) -> usize {
        s ^ 1
    }
    fn identity(&self) -> Element {
        vec![0]
    }
    fn multiply(&self, g: &Element, s: usize) -> Element {
        let mut out = g.clone();
        match s {
            0 => out[0] += 1,
            1 => out[0] -= 1,
            _ => {
                let c = out[0];
                let d = if s == 2 { 1 } else { -1 };
                let positions: Vec<i64> = out[1..].chunks(2).map(|p| p[0]).collect();
                match positions.binary_search(&c) {
                    Ok(i) => {
                        let at = 2 + 2 * i;
                        out[at] += d;
                        if out[at] == 0 {
                            out.drain(at - 1..=at);
                        }
                    }
                    Err(i) => {
                        let at = 1 + 2 * i;
                        out.insert(at, d);
                        out.insert(at, c);
                    }
                }
            }
        }
        out
    }
    fn word(&self, g: &Element) -> Vec<usize> {
        let mut w = Vec::new();
        let mut cur = 0;
        for pv in g[1..].chunks(2) {
            w.extend(repeat(0, pv[0] - cur, 1));
            w.extend(repeat(2, pv[1], 3));
            cur = pv[0];
        }
        w.extend(repeat(0, g[0] - cur, 1));
        w
    }
    fn label(&self, g: &Element) -> String {
        let vals: Vec<String> = g[1..]
            .chunks(2)
            .map(|pv| format!("{}={}", pv[0], pv[1]))
            .collect();
        format!("{}:{{{}}}", g[0], vals.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn zoo() -> Vec<SharedGroup> {
        vec![
            Arc::new(Zn { n: 2 }),
            Arc::new(ZGens::new(vec![1, 2, 3]).unwrap()),
            Arc::new(Free { k: 2 }),
            Arc::new(Cyclic { n: 5 }),
            Arc::new(Cyclic { n: 2 }),
            Arc::new(Symmetric { n: 4 }),
            Arc::new(Product {
                left: Arc::new(Cyclic { n: 2 }),
                right: Arc::new(Free { k: 1 }),
            }),
            Arc::new(Amalgam::free_product(2, 3).unwrap()),
            Arc::new(Amalgam::free_product(0, 0).unwrap()),
            Arc::new(Amalgam::new(0, 0, 2, 3).unwrap()),
            Arc::new(Amalgam::new(4, 6, 2, 3).unwrap()),
            Arc::new(Hnn::new(1, 1).unwrap()),
            Arc::new(Hnn::new(1, 2).unwrap()),
            Arc::new(Lamplighter),
            Arc::new(ZWreathZ),
        ]
    }

    /// Deterministic pseudo-random words.
    fn words(gens: usize, count: usize, len: usize) -> Vec<Vec<usize>> {
        let mut x: u64 = 0x9e37_79b9_7f4a_7c15;
        (0..count)
            .map(|_| {
                (0..len)
                    .map(|_| {
                        x ^= x << 13;
                        x ^= x >> 7;
                        x ^= x << 17;
                        (x % gens as u64) as usize
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn group_axioms_on_random_words() {
        for g in zoo() {
            let k = g.generators().len();
            if k == 0 {
                continue;
            }
            for w in words(k, 60, 9) {
                let x = g.eval(&w);
                assert_eq!(g.eval(&g.word(&x)), x, "{} word round trip", g.name());
                for s in 0..k {
                    let y = g.multiply(&x, s);
                    assert_eq!(
                        g.multiply(&y, g.inverse_generator(s)),
                        x,
                        "{} letter {s}",
                        g.name()
                    );
                }
                assert_eq!(g.mul(&x, &g.inverse(&x)), g.identity(), "{}", g.name());
            }
            for pair in words(k, 42, 6).chunks_exact(3) {
                let (a, b, c) = (g.eval(&pair[0]), g.eval(&pair[1]), g.eval(&pair[2]));
                assert_eq!(
                    g.mul(&g.mul(&a, &b), &c),
                    g.mul(&a, &g.mul(&b, &c)),
                    "{}",
                    g.name()
                );
            }
        }
    }

    #[test]
    fn relations_hold() {
        let tref = Amalgam::new(0, 0, 2, 3).unwrap();
        // a^2 = b^3, central
        assert_eq!(tref.eval(&[0, 0]), tref.eval(&[2, 2, 2]));
        let z23 = Amalgam::free_product(2, 3).unwrap();
        assert_eq!(z23.eval(&[0, 0]), z23.identity());
        assert_eq!(z23.eval(&[1, 1, 1]), z23.identity());
        let bs = Hnn::new(1, 2).unwrap();
        // t^-1 a t = a^2
        assert_eq!(bs.eval(&[3, 0, 2]), bs.eval(&[0, 0]));
        let z2 = Hnn::new(1, 1).unwrap();
        assert_eq!(z2.eval(&[0, 2]), z2.eval(&[2, 0]));
        let l = Lamplighter;
        assert_eq!(l.eval(&[2, 2]), l.identity());
        assert_eq!(l.label(&l.eval(&[2, 0, 2])), "1:{0,1}");
    }

    #[test]
    fn free_labels_and_words() {
        let f = Free { k: 2 };
        let g = f.eval(&[0, 0, 2, 1, 1, 1]);
        assert_eq!(f.label(&g), "aabAAA");
        assert_eq!(f.label(&f.eval(&[0, 1])), "e");
    }
}
