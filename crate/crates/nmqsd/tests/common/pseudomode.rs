//! Exact reference dynamics from the pseudomode embedding of the Lorentzian
//! bath: the two qubits couple to one damped bosonic mode,
//!
//! ```text
//! H = H_s + Ω a†a + g (L a† + L† a),   g = λ √(γ/2)
//! ρ̇ = −i[H, ρ] + 2γ (a ρ a† − ½{a†a, ρ})
//! ```
//!
//! whose free correlation ⟨a(t) a†(0)⟩ g² = λ² (γ/2) e^{−γ|t| − iΩt} reproduces
//! the bath correlation. The total excitation number is conserved by H and
//! only lowered by the damping, so starting from at most two excitations and an
//! empty mode the Fock space truncated at n ≤ 2 is exact.

use nalgebra::DMatrix;
use nmqsd::model::{build_hamiltonian, coupling_operator, ModelParams, Operator4, C64};

/// Mode levels kept (n = 0, 1, 2).
const LEVELS: usize = 3;
const DIM: usize = 4 * LEVELS;

type M = DMatrix<C64>;

pub struct Pseudomode {
    h: M,
    a: M,
    a_dag: M,
    n_op: M,
    rate: f64,
}

fn kron(sys: &Operator4, mode: &M) -> M {
    M::from_fn(DIM, DIM, |i, j| {
        sys[(i / LEVELS, j / LEVELS)] * mode[(i % LEVELS, j % LEVELS)]
    })
}

impl Pseudomode {
    pub fn new(p: &ModelParams) -> Self {
        let mut a = M::zeros(LEVELS, LEVELS);
        for n in 1..LEVELS {
            a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        let a_dag = a.adjoint();
        let num = &a_dag * &a;
        let id_s = Operator4::identity();
        let l = coupling_operator();
        let g = p.lambda * (0.5 * p.gamma).sqrt();
        let h = kron(&build_hamiltonian(p), &M::identity(LEVELS, LEVELS))
            + kron(&id_s, &num) * C64::new(p.omega, 0.0)
            + (kron(&l, &a_dag) + kron(&l.adjoint(), &a)) * C64::new(g, 0.0);
        let a_full = kron(&id_s, &a);
        let a_dag_full = a_full.adjoint();
        let n_op = &a_dag_full * &a_full;
        Pseudomode {
            h,
            a: a_full,
            a_dag: a_dag_full,
            n_op,
            rate: 2.0 * p.gamma,
        }
    }

    fn rhs(&self, rho: &M) -> M {
        let i = C64::new(0.0, 1.0);
        let comm = &self.h * rho - rho * &self.h;
        let jump = &self.a * rho * &self.a_dag;
        let anti = &self.n_op * rho + rho * &self.n_op;
        comm * (-i) + (jump - anti * C64::new(0.5, 0.0)) * C64::new(self.rate, 0.0)
    }

    /// Reduced two-qubit state on `0, dt·stride, …, T` (RK4 with step `dt`).
    pub fn evolve(&self, rho0: &Operator4, dt: f64, t_end: f64, stride: usize) -> (Vec<f64>, Vec<Operator4>) {
        let steps = (t_end / dt).round() as usize;
        let mut vac = M::zeros(LEVELS, LEVELS);
        vac[(0, 0)] = C64::new(1.0, 0.0);
        let mut rho = kron(rho0, &vac);
        let mut times = vec![0.0];
        let mut out = vec![reduce(&rho)];
        let h = C64::new(dt, 0.0);
        for n in 0..steps {
            let k1 = self.rhs(&rho);
            let k2 = self.rhs(&(&rho + &k1 * (h * 0.5)));
            let k3 = self.rhs(&(&rho + &k2 * (h * 0.5)));
            let k4 = self.rhs(&(&rho + &k3 * h));
            rho += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * (h / 6.0);
            if (n + 1) % stride == 0 || n + 1 == steps {
                times.push((n + 1) as f64 * dt);
                out.push(reduce(&rho));
            }
        }
        (times, out)
    }
}

/// Partial trace over the mode.
fn reduce(rho: &M) -> Operator4 {
    Operator4::from_fn(|i, j| (0..LEVELS).map(|n| rho[(i * LEVELS + n, j * LEVELS + n)]).sum())
}
