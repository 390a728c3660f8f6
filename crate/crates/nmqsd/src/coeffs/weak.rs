//! Weak-coupling expansion of the O-operator through order λ⁵.
//!
//! Ô = λÔ⁽¹⁾ + λ²Ô⁽²⁾ + λ³Ô⁽³⁾ + λ⁴Ô⁽⁴⁾ + λ⁵Ô⁽⁵⁾ with
//!
//! * Ô⁽¹⁾(t,s) = f1(t,s) L, f1 = e^{iω_s(t−s)} (closed form),
//! * Ô⁽²⁾ ≡ 0,
//! * Ô⁽³⁾, Ô⁽⁵⁾ noise free, spanned by σ₋ᴬ, σ₋ᴮ, σ_zᴬσ₋ᴮ, σ₋ᴬσ_zᴮ with
//!   coefficients f_nᴬ, f_nᴮ, g_nᴬ, g_nᴮ obeying two-time ODEs in t with the
//!   boundary value 0 at s = t,
//! * Ô⁽⁴⁾ the single noise channel, first order in z*, multiplying σ₋ᴬσ₋ᴮ with
//!   kernel H4′(t,s′) = 2(G3ᴬ+G3ᴮ)(s′) e^{(−R+2iω_s)(t−s′)}, R = γ + iΩ.
//!
//! The α-convolutions F_n(t) = ∫₀^t α(t,s) f_n(t,s) ds are evaluated by the
//! trapezoidal rule over the lattice rows. The lattice is advanced one time
//! column at a time (all rows s ≤ t together), so only the current column is
//! kept unless [`WeakOptions::keep_lattice`] asks for the full history.
//!
//! Pass 1 marches the order-3 rows on a grid of half the track step so the
//! order-3 convolutions are available at the RK4 midpoints of pass 2, which
//! marches orders 3 and 5 together on the track grid.

use std::io::Write;

use crate::coeffs::track::DIVERGENCE_LIMIT;
use crate::error::{Error, Result};
use crate::model::{bath_correlation, c, coupling_operator, ModelParams, Operator4, C64};
use crate::noise::step_count;
use crate::ode::trapezoid;

/// Expansion order of the weak-coupling O-operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WeakOrder {
    First = 1,
    Third = 3,
    Fifth = 5,
}

impl WeakOrder {
    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            1 => Ok(WeakOrder::First),
            3 => Ok(WeakOrder::Third),
            5 => Ok(WeakOrder::Fifth),
            _ => Err(Error::InvalidParameter(format!(
                "weak-coupling order must be 1, 3 or 5, got {n}"
            ))),
        }
    }

    pub fn number(self) -> u32 {
        self as u32
    }
}

/// Options of [`integrate_weak_coupling_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WeakOptions {
    /// Retain every lattice column (memory O((T/step)²)).
    pub keep_lattice: bool,
}

/// Per-row coefficients (order 3 then order 5), in the component order of
/// [`Component`].
pub type Row = [C64; 8];

/// Index into a [`Row`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    F3A = 0,
    F3B = 1,
    G3A = 2,
    G3B = 3,
    F5A = 4,
    F5B = 5,
    G5A = 6,
    G5B = 7,
}

/// Two-time lattice `rows[n][j]` = coefficients at (t_n, s_j), j ≤ n.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakLattice {
    pub step: f64,
    pub columns: Vec<Vec<Row>>,
}

impl WeakLattice {
    pub fn value(&self, n: usize, j: usize, comp: Component) -> C64 {
        self.columns[n][j][comp as usize]
    }
}

/// Convolved weak-coupling coefficients on the grid `t_k = k·step`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakCouplingTrack {
    pub params: ModelParams,
    pub order: WeakOrder,
    pub step: f64,
    /// F⁽¹⁾(t) = ∫α f1 (closed form).
    pub f1: Vec<C64>,
    pub f3a: Vec<C64>,
    pub f3b: Vec<C64>,
    pub g3a: Vec<C64>,
    pub g3b: Vec<C64>,
    pub f5a: Vec<C64>,
    pub f5b: Vec<C64>,
    pub g5a: Vec<C64>,
    pub g5b: Vec<C64>,
    /// H̄4(t) = ∫₀^t α(t,s′) H4′(t,s′) ds′ (order 5 only).
    pub h4bar: Vec<C64>,
    /// Largest |Ô⁽²⁾| seen while integrating its (source-free) equation.
    pub o2_max_abs: f64,
    pub lattice: Option<WeakLattice>,
}

/// F⁽¹⁾(t) = (γ/2)(1 − e^{−(γ−iΔ)t})/(γ − iΔ).
pub fn first_order_convolution(t: f64, params: &ModelParams) -> C64 {
    let k = c(params.gamma, -params.delta);
    (1.0 - (-k * t).exp()) * (0.5 * params.gamma) / k
}

/// R = γ + iΩ, the decay constant of the order-4 kernel.
pub fn kernel_decay(params: &ModelParams) -> C64 {
    c(params.gamma, params.omega)
}

/// Integrate the hierarchy up to `order` on `[0, t_end]` with track step `step`.
pub fn integrate_weak_coupling(
    params: &ModelParams,
    order: WeakOrder,
    step: f64,
    t_end: f64,
) -> Result<WeakCouplingTrack> {
    integrate_weak_coupling_with(params, order, step, t_end, WeakOptions::default())
}

fn check(name: &'static str, v: C64, t: f64) -> Result<()> {
    if !v.is_finite() || v.norm() > DIVERGENCE_LIMIT {
        return Err(Error::Divergence {
            name,
            t,
            limit: DIVERGENCE_LIMIT,
        });
    }
    Ok(())
}

/// As [`integrate_weak_coupling`] with explicit options.
pub fn integrate_weak_coupling_with(
    params: &ModelParams,
    order: WeakOrder,
    step: f64,
    t_end: f64,
    opts: WeakOptions,
) -> Result<WeakCouplingTrack> {
    params.validate()?;
    let n = step_count(step, t_end)?;
    let f1: Vec<C64> = (0..=n)
        .map(|k| first_order_convolution(step * k as f64, params))
        .collect();
    let zeros = vec![C64::new(0.0, 0.0); n + 1];
    let mut track = WeakCouplingTrack {
        params: *params,
        order,
        step,
        f1,
        f3a: zeros.clone(),
        f3b: zeros.clone(),
        g3a: zeros.clone(),
        g3b: zeros.clone(),
        f5a: zeros.clone(),
        f5b: zeros.clone(),
        g5a: zeros.clone(),
        g5b: zeros.clone(),
        h4bar: zeros,
        o2_max_abs: 0.0,
        lattice: None,
    };
    if order == WeakOrder::First {
        return Ok(track);
    }
    let fine = third_order_pass(params, 0.5 * step, 2 * n, opts.keep_lattice)?;
    for k in 0..=n {
        track.f3a[k] = fine.conv[2 * k][0];
        track.f3b[k] = fine.conv[2 * k][1];
        track.g3a[k] = fine.conv[2 * k][2];
        track.g3b[k] = fine.conv[2 * k][3];
    }
    track.o2_max_abs = fine.o2_max_abs;
    if order == WeakOrder::Fifth {
        fifth_order_pass(params, step, n, &fine, opts, &mut track)?;
    } else if opts.keep_lattice {
        track.lattice = Some(third_order_lattice(&fine, step, n));
    }
    Ok(track)
}

/// Output of the fine order-3 pass.
struct FinePass {
    step: f64,
    /// [F3A, F3B, G3A, G3B] at every fine time.
    conv: Vec<[C64; 4]>,
    /// Order-3 columns at even fine indices, only when a lattice is wanted.
    columns: Vec<Vec<[C64; 4]>>,
    o2_max_abs: f64,
}

/// Tabulate e^{κ·m·h} for m = 0..len.
fn powers(kappa: C64, h: f64, len: usize) -> Vec<C64> {
    (0..len).map(|m| (kappa * (h * m as f64)).exp()).collect()
}

/// Order-3 rows on the grid `q·m`, m = 0..=m_end, with their convolutions.
///
/// ∂_t f3ᴬ = iω f3ᴬ + F⁽¹⁾ᴬ(t) f1ᴬ(t,s),  ∂_t g3ᴬ = iω g3ᴬ − f1ᴬ(t,s) F⁽¹⁾ᴮ(t)
/// and A ↔ B. Alongside, Ô⁽²⁾'s coefficient is integrated with the source
/// −z*_t[L, Ô⁽¹⁾], whose operator part [L, L] vanishes.
fn third_order_pass(params: &ModelParams, q: f64, m_end: usize, keep: bool) -> Result<FinePass> {
    let iw = c(0.0, params.omega_s);
    // f1 at lags that are multiples of q/2 (RK4 stage offsets)
    let f1_tab = powers(iw, 0.5 * q, 2 * m_end + 3);
    let big_f1 = |half_idx: usize| first_order_convolution(0.5 * q * half_idx as f64, params);
    // Ô⁽²⁾ is driven only through [L, Ô⁽¹⁾] = f1·[L, L]; keep the operator
    // norm of [L, L] as the source scale so the zero is computed, not assumed.
    let commutator = |a: &Operator4, b: &Operator4| a * b - b * a;
    let l = coupling_operator();
    let o2_scale = commutator(&l, &l).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut rows: Vec<[C64; 4]> = vec![[C64::new(0.0, 0.0); 4]];
    let mut o2: Vec<C64> = vec![C64::new(0.0, 0.0)];
    let mut conv = Vec::with_capacity(m_end + 1);
    conv.push([C64::new(0.0, 0.0); 4]);
    let mut o2_max: f64 = 0.0;
    let mut columns = Vec::new();
    if keep {
        columns.push(rows.clone());
    }
    for m in 0..m_end {
        // stage sources for each row j at t_m + {0, q/2, q}
        let fa = [big_f1(2 * m), big_f1(2 * m + 1), big_f1(2 * m + 2)];
        let fb = fa; // equal qubit frequencies: F⁽¹⁾ᴬ = F⁽¹⁾ᴮ
        for (j, row) in rows.iter_mut().enumerate() {
            let lag = 2 * (m - j);
            let f1s = [f1_tab[lag], f1_tab[lag + 1], f1_tab[lag + 2]];
            let src = |stage: usize| -> [C64; 4] {
                let f1 = f1s[stage];
                [fa[stage] * f1, fb[stage] * f1, -f1 * fb[stage], -f1 * fa[stage]]
            };
            *row = linear_rk4(row, iw, q, src);
            let o = &mut o2[j];
            *o = linear_rk4(&[*o], iw, q, |stage| [-f1s[stage] * o2_scale])[0];
            o2_max = o2_max.max(o.norm());
        }
        rows.push([C64::new(0.0, 0.0); 4]);
        o2.push(C64::new(0.0, 0.0));
        let t = q * (m + 1) as f64;
        let mut out = [C64::new(0.0, 0.0); 4];
        for (comp, slot) in out.iter_mut().enumerate() {
            *slot = trapezoid(
                rows.iter()
                    .enumerate()
                    .map(|(j, r)| bath_correlation(t, q * j as f64, params) * r[comp]),
                q,
            );
        }
        for (name, v) in ["F3A", "F3B", "G3A", "G3B"].iter().zip(out.iter()) {
            check(name, *v, t)?;
        }
        conv.push(out);
        if keep && (m + 1) % 2 == 0 {
            columns.push(rows.iter().step_by(2).copied().collect());
        }
    }
    Ok(FinePass {
        step: q,
        conv,
        columns,
        o2_max_abs: o2_max,
    })
}

fn third_order_lattice(fine: &FinePass, step: f64, n: usize) -> WeakLattice {
    let columns = (0..=n)
        .map(|k| {
            fine.columns[k]
                .iter()
                .map(|r| {
                    let mut full = [C64::new(0.0, 0.0); 8];
                    full[..4].copy_from_slice(r);
                    full
                })
                .collect()
        })
        .collect();
    WeakLattice { step, columns }
}

/// RK4 for ẏ = iω y + S(stage), componentwise.
#[inline]
fn linear_rk4<const N: usize>(y: &[C64; N], iw: C64, h: f64, src: impl Fn(usize) -> [C64; N]) -> [C64; N] {
    crate::ode::rk4_step(y, h, |stage, y| {
        let s = src(stage);
        let mut d = [C64::new(0.0, 0.0); N];
        for i in 0..N {
            d[i] = iw * y[i] + s[i];
        }
        d
    })
}

/// Orders 3 and 5 on the track grid, plus H̄4.
///
/// ∂_t f5ᴬ = iω f5ᴬ − F⁽¹⁾ᴬ(g3ᴬ − f3ᴬ) + f1ᴬ(F3ᴬ + G3ᴬ) − ½H4′(t,s)
/// ∂_t g5ᴬ = iω g5ᴬ − F⁽¹⁾ᴮ(f3ᴬ − g3ᴬ) − ½H4′(t,s)
///           − (F3ᴮ f1ᴬ − G3ᴬ f1ᴬ − G3ᴬ f1ᴮ − G3ᴮ f1ᴮ)
/// and A ↔ B.
fn fifth_order_pass(
    params: &ModelParams,
    h: f64,
    n: usize,
    fine: &FinePass,
    opts: WeakOptions,
    track: &mut WeakCouplingTrack,
) -> Result<()> {
    debug_assert!((fine.step - 0.5 * h).abs() < 1e-15);
    let iw = c(0.0, params.omega_s);
    let r = kernel_decay(params);
    let f1_tab = powers(iw, 0.5 * h, 2 * n + 3);
    let h4_tab = powers(-r + c(0.0, 2.0 * params.omega_s), 0.5 * h, 2 * n + 3);
    let big_f1 = |half_idx: usize| first_order_convolution(0.5 * h * half_idx as f64, params);
    let g_sum = |fine_idx: usize| fine.conv[fine_idx][2] + fine.conv[fine_idx][3];

    let mut rows: Vec<Row> = vec![[C64::new(0.0, 0.0); 8]];
    let mut lattice = opts.keep_lattice.then(|| vec![rows.clone()]);
    let mut h4bar = C64::new(0.0, 0.0);
    let h4_decay = -r * 2.0 + c(0.0, 2.0 * params.omega_s);
    for k in 0..n {
        let fa = [big_f1(2 * k), big_f1(2 * k + 1), big_f1(2 * k + 2)];
        let fb = fa;
        let c3 = [fine.conv[2 * k], fine.conv[2 * k + 1], fine.conv[2 * k + 2]];
        for (j, row) in rows.iter_mut().enumerate() {
            let lag = 2 * (k - j);
            let f1s = [f1_tab[lag], f1_tab[lag + 1], f1_tab[lag + 2]];
            let h4_at_s = g_sum(2 * j) * 2.0;
            let h4s = [
                h4_at_s * h4_tab[lag],
                h4_at_s * h4_tab[lag + 1],
                h4_at_s * h4_tab[lag + 2],
            ];
            *row = crate::ode::rk4_step(row, h, |stage, y| {
                let f1 = f1s[stage];
                let (a1, b1) = (fa[stage], fb[stage]);
                let [f3a_c, f3b_c, g3a_c, g3b_c] = c3[stage];
                let half_h4 = h4s[stage] * 0.5;
                let [f3a, f3b, g3a, g3b, f5a, f5b, g5a, g5b] = *y;
                [
                    iw * f3a + a1 * f1,
                    iw * f3b + b1 * f1,
                    iw * g3a - f1 * b1,
                    iw * g3b - f1 * a1,
                    iw * f5a - a1 * (g3a - f3a) + f1 * (f3a_c + g3a_c) - half_h4,
                    iw * f5b - b1 * (g3b - f3b) + f1 * (f3b_c + g3b_c) - half_h4,
                    iw * g5a - b1 * (f3a - g3a) - half_h4 - (f3b_c * f1 - g3a_c * f1 - g3a_c * f1 - g3b_c * f1),
                    iw * g5b - a1 * (f3b - g3b) - half_h4 - (f3a_c * f1 - g3b_c * f1 - g3b_c * f1 - g3a_c * f1),
                ]
            });
        }
        rows.push([C64::new(0.0, 0.0); 8]);
        // H̄4: dH̄4/dt = γ(G3ᴬ+G3ᴮ)(t) + (−2R + 2iω)H̄4
        h4bar = crate::ode::rk4_step(&[h4bar], h, |stage, y| {
            [g_sum(2 * k + stage) * params.gamma + h4_decay * y[0]]
        })[0];
        let t = h * (k + 1) as f64;
        let conv = |comp: Component| {
            trapezoid(
                rows.iter()
                    .enumerate()
                    .map(|(j, r)| bath_correlation(t, h * j as f64, params) * r[comp as usize]),
                h,
            )
        };
        let idx = k + 1;
        track.f5a[idx] = conv(Component::F5A);
        track.f5b[idx] = conv(Component::F5B);
        track.g5a[idx] = conv(Component::G5A);
        track.g5b[idx] = conv(Component::G5B);
        track.h4bar[idx] = h4bar;
        for (name, v) in [
            ("F5A", track.f5a[idx]),
            ("F5B", track.f5b[idx]),
            ("G5A", track.g5a[idx]),
            ("G5B", track.g5b[idx]),
            ("H4bar", h4bar),
        ] {
            check(name, v, t)?;
        }
        if let Some(l) = lattice.as_mut() {
            l.push(rows.clone());
        }
    }
    track.lattice = lattice.map(|columns| WeakLattice { step: h, columns });
    Ok(())
}

impl WeakCouplingTrack {
    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.step * k as f64
    }

    /// Noise-free X = F − G at track index `k`, with the powers of λ applied.
    pub fn x(&self, k: usize) -> C64 {
        let l = self.params.lambda;
        let mut x = self.f1[k] * l;
        if self.order >= WeakOrder::Third {
            x += (self.f3a[k] - self.g3a[k]) * l.powi(3);
        }
        if self.order == WeakOrder::Fifth {
            x += (self.f5a[k] - self.g5a[k]) * l.powi(5);
        }
        x
    }

    /// H4′(t_k, s_j) = 2(G3ᴬ+G3ᴮ)(s_j) e^{(−R+2iω_s)(t_k−s_j)}.
    pub fn h4_prime(&self, k: usize, j: usize) -> C64 {
        let r = kernel_decay(&self.params);
        let lag = self.step * (k as f64 - j as f64);
        (self.g3a[j] + self.g3b[j]) * 2.0 * ((-r + c(0.0, 2.0 * self.params.omega_s)) * lag).exp()
    }

    /// CSV with `t` and re/im of every convolved coefficient.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let names = ["F1", "F3A", "F3B", "G3A", "G3B", "F5A", "F5B", "G5A", "G5B", "H4bar"];
        let mut header = vec!["t".to_string()];
        for n in names {
            header.push(format!("re_{n}"));
            header.push(format!("im_{n}"));
        }
        wr.write_record(&header)?;
        for k in 0..self.len() {
            let vals = [
                self.f1[k],
                self.f3a[k],
                self.f3b[k],
                self.g3a[k],
                self.g3b[k],
                self.f5a[k],
                self.f5b[k],
                self.g5a[k],
                self.g5b[k],
                self.h4bar[k],
            ];
            let mut rec = vec![self.time(k).to_string()];
            for v in vals {
                rec.push(v.re.to_string());
                rec.push(v.im.to_string());
            }
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}
