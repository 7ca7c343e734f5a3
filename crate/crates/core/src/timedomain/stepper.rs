//! One implicit step solves for the new acceleration `a1`. Both schemes share
//! the predictors
//!
//! ```text
//! u1 = u0 + dt v0 + dt^2/4 (a0 + a1),   v1 = v0 + dt/2 (a0 + a1)
//! ```
//!
//! and the third-order equation adds `tau (a1 - a0) / (dt/2) = G0 + G1`.
//! The nonlinear coefficient and source terms are frozen at the current
//! iterate and refreshed by Picard iteration.

use crate::domain::Formulation;
use crate::error::{Error, Result};
use crate::fracderiv::CaputoL1Kernel;
use crate::history::FieldHistory;
use crate::norms::first_derivative;
use crate::stencil::Laplacian1D;
use crate::tridiag::Tridiagonal;

use super::{Damping, PartialRun, Problem, StepperConfig};

struct Fractional {
    b1: f64,
    /// `None` for order one (plain backward difference).
    kernel: Option<CaputoL1Kernel>,
    scale: f64,
    /// Laplacian history per node, `lap[i][n]`.
    lap: Vec<Vec<f64>>,
}

impl Fractional {
    fn explicit_part(&self, i: usize) -> f64 {
        let h = &self.lap[i];
        let last = *h.last().expect("history starts with the initial Laplacian");
        let mem = match &self.kernel {
            // memory_sum skips the newest increment; the pending one pairs
            // with the unknown Laplacian
            Some(k) => {
                let mut ext = h.clone();
                ext.push(last);
                k.memory_sum(&ext)
            }
            None => 0.0,
        };
        self.b1 * self.scale * (mem - last)
    }
}

struct Stepper<'a> {
    p: &'a Problem,
    cfg: &'a StepperConfig,
    lap: Laplacian1D,
    n: usize,
    dt: f64,
    c2: f64,
    b: f64,
    kappa: f64,
    gradient: bool,
    potential: bool,
    tau_h: f64,
    jmgt: bool,
    frac: Option<Fractional>,
    base: Tridiagonal<f64>,
}

impl<'a> Stepper<'a> {
    fn new(p: &'a Problem, cfg: &'a StepperConfig) -> Result<Self> {
        let lap = Laplacian1D::new(&p.grid, &p.bc);
        let n = p.grid.n_nodes();
        let dt = p.time.dt();
        let eq = p.model.equation;
        let kappa = if eq == super::Equation::LinearWave {
            0.0
        } else {
            p.medium.kappa
        };
        let jmgt = eq.is_jmgt();
        let frac = match p.model.damping {
            Damping::CaputoWismer { b, beta } => {
                let (kernel, scale) = if beta == 1.0 {
                    (None, 1.0 / dt)
                } else {
                    let k = CaputoL1Kernel::new(beta, dt, p.time.n_steps() + 2)?;
                    let s = k.scale();
                    (Some(k), s)
                };
                Some(Fractional {
                    b1: b,
                    kernel,
                    scale,
                    lap: vec![Vec::with_capacity(p.time.n_steps() + 1); n],
                })
            }
            _ => None,
        };
        let mut s = Self {
            p,
            cfg,
            lap,
            n,
            dt,
            c2: p.medium.c2(),
            b: p.model.strong_damping(&p.medium),
            kappa,
            gradient: eq.has_gradient_term(),
            potential: p.model.formulation == Formulation::PotentialWestervelt,
            tau_h: if jmgt { p.medium.tau / (0.5 * dt) } else { 0.0 },
            jmgt,
            frac,
            base: Tridiagonal::zeros(n),
        };
        s.base = s.assemble_base();
        Ok(s)
    }

    fn beta2(&self) -> f64 {
        0.25 * self.dt * self.dt
    }

    fn gamma2(&self) -> f64 {
        0.5 * self.dt
    }

    fn c_eff(&self) -> f64 {
        self.c2 + self.frac.as_ref().map_or(0.0, |f| f.b1 * f.scale)
    }

    fn is_linear(&self) -> bool {
        self.kappa == 0.0 && !self.gradient
    }

    /// Everything in the step matrix except `tau_h + m*` on the diagonal.
    fn assemble_base(&self) -> Tridiagonal<f64> {
        let (b2, g2, ce, b) = (self.beta2(), self.gamma2(), self.c_eff(), self.b);
        let mut m = Tridiagonal::zeros(self.n);
        self.lap.add_stencil(&mut m, -(ce * b2 + b * g2));
        let r = self.lap.flux_weight();
        for end in self.lap.robin_ends() {
            m.diag[end.node] +=
                r * (ce * (end.gamma * b2 + end.beta * g2) + b * (end.gamma * g2 + end.beta));
        }
        m
    }

    fn source_at(&self, t: f64) -> Vec<f64> {
        let mut s = match &self.p.source {
            Some(f) => (0..self.n).map(|i| f(t, self.p.grid.x(i))).collect(),
            None => vec![0.0; self.n],
        };
        for i in self.lap.dirichlet_nodes() {
            s[i] = 0.0;
        }
        s
    }

    /// Coefficient of `u_tt` at a state.
    fn mass(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let w = if self.potential { v } else { u };
        w.iter().map(|x| 1.0 - self.kappa * x).collect()
    }

    /// Right-hand side nonlinearity not absorbed into the mass.
    fn extra(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        if self.gradient {
            let dx = self.lap.dx();
            let ux = first_derivative(u, dx);
            let vx = first_derivative(v, dx);
            ux.iter().zip(&vx).map(|(a, b)| 2.0 * a * b).collect()
        } else if !self.potential && self.kappa != 0.0 {
            v.iter().map(|x| self.kappa * x * x).collect()
        } else {
            vec![0.0; self.n]
        }
    }

    fn check_mass(&self, m: &[f64], time: f64) -> Result<()> {
        for (i, &mi) in m.iter().enumerate() {
            if self.lap.is_dirichlet(i) {
                continue;
            }
            if !mi.is_finite() || mi < self.cfg.degeneracy_floor {
                return Err(Error::Degeneracy {
                    time,
                    node: i,
                    margin: mi,
                    floor: self.cfg.degeneracy_floor,
                });
            }
        }
        Ok(())
    }

    /// `b * Laplacian(v)` with the flux split: `b (K v - R gamma v)`; the
    /// `-R beta a` part is handled by the caller.
    fn damping_explicit(&self, v: &[f64]) -> Vec<f64> {
        let mut kv = vec![0.0; self.n];
        self.lap.apply_stencil(v, &mut kv);
        let r = self.lap.flux_weight();
        for end in self.lap.robin_ends() {
            kv[end.node] -= r * end.gamma * v[end.node];
        }
        kv.iter().map(|x| self.b * x).collect()
    }

    /// Residual `G = -m a + c^2 L(u;v) + b L(v;a) + frac + N + r`.
    fn residual(&self, u: &[f64], v: &[f64], a: &[f64], t: f64) -> Vec<f64> {
        let m = self.mass(u, v);
        let lu = self.lap.apply(u, v);
        let lv = self.lap.apply(v, a);
        let ex = self.extra(u, v);
        let s = self.source_at(t);
        (0..self.n)
            .map(|i| {
                if self.lap.is_dirichlet(i) {
                    0.0
                } else {
                    -m[i] * a[i] + self.c2 * lu[i] + self.b * lv[i] + ex[i] + s[i]
                }
            })
            .collect()
    }

    fn initial_acceleration(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let lu = self.lap.apply(u, v);
        let bv = self.damping_explicit(v);
        let m = self.mass(u, v);
        let ex = self.extra(u, v);
        let s = self.source_at(0.0);
        let mut diag = m.clone();
        let r = self.lap.flux_weight();
        for end in self.lap.robin_ends() {
            diag[end.node] += self.b * end.beta * r;
        }
        (0..self.n)
            .map(|i| {
                if self.lap.is_dirichlet(i) {
                    0.0
                } else {
                    (self.c2 * lu[i] + bv[i] + ex[i] + s[i]) / diag[i]
                }
            })
            .collect()
    }

    fn step(
        &self,
        u0: &[f64],
        v0: &[f64],
        a0: &[f64],
        t0: f64,
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let (dt, b2, g2, n) = (self.dt, self.beta2(), self.gamma2(), self.n);
        let t1 = t0 + dt;
        let uh: Vec<f64> = (0..n).map(|i| u0[i] + dt * v0[i] + b2 * a0[i]).collect();
        let vh: Vec<f64> = (0..n).map(|i| v0[i] + g2 * a0[i]).collect();

        // parts of the right-hand side that do not depend on the iterate
        let ce = self.c_eff();
        let lu = self.lap.apply(&uh, &vh);
        let bv = self.damping_explicit(&vh);
        let s1 = self.source_at(t1);
        let mut fixed: Vec<f64> = (0..n).map(|i| ce * lu[i] + bv[i] + s1[i]).collect();
        if let Some(f) = &self.frac {
            for (i, x) in fixed.iter_mut().enumerate() {
                *x += f.explicit_part(i);
            }
        }
        if self.jmgt {
            let g0 = self.residual(u0, v0, a0, t0);
            for i in 0..n {
                fixed[i] += self.tau_h * a0[i] + g0[i];
            }
        }

        let mut a = a0.to_vec();
        let max_iter = if self.is_linear() {
            1
        } else {
            self.cfg.picard_max_iter
        };
        let mut update = f64::INFINITY;
        for _ in 0..max_iter {
            let us: Vec<f64> = (0..n).map(|i| uh[i] + b2 * a[i]).collect();
            let vs: Vec<f64> = (0..n).map(|i| vh[i] + g2 * a[i]).collect();
            let m = self.mass(&us, &vs);
            self.check_mass(&m, t1)?;
            let ex = self.extra(&us, &vs);
            let mut mat = self.base.clone();
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                mat.diag[i] += self.tau_h + m[i];
                rhs[i] = fixed[i] + ex[i];
            }
            for i in self.lap.dirichlet_nodes() {
                mat.pin_row(i, 1.0);
                rhs[i] = 0.0;
            }
            let next = mat.solve(&rhs)?;
            let diff = next
                .iter()
                .zip(&a)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            let scale = next.iter().map(|x| x.abs()).fold(0.0, f64::max);
            a = next;
            if !diff.is_finite() || !scale.is_finite() {
                return Err(Error::PicardDivergence {
                    time: t1,
                    iterations: max_iter,
                    update: diff,
                });
            }
            update = if scale > 0.0 { diff / scale } else { diff };
            if self.is_linear() || update <= self.cfg.picard_tol {
                update = 0.0;
                break;
            }
        }
        if update > 0.0 {
            return Err(Error::PicardDivergence {
                time: t1,
                iterations: max_iter,
                update,
            });
        }
        let u1: Vec<f64> = (0..n).map(|i| uh[i] + b2 * a[i]).collect();
        let v1: Vec<f64> = (0..n).map(|i| vh[i] + g2 * a[i]).collect();
        self.check_mass(&self.mass(&u1, &v1), t1)?;
        Ok((u1, v1, a))
    }
}

pub(super) fn run(p: &Problem, cfg: &StepperConfig) -> Result<PartialRun> {
    let mut st = Stepper::new(p, cfg)?;
    let mut u = p.initial.u0.clone();
    let mut v = p.initial.u1.clone();
    for i in st.lap.dirichlet_nodes().collect::<Vec<_>>() {
        u[i] = 0.0;
        v[i] = 0.0;
    }
    st.check_mass(&st.mass(&u, &v), 0.0)?;
    let mut a = match &p.initial.u2 {
        Some(a) => {
            let mut a = a.clone();
            for i in st.lap.dirichlet_nodes() {
                a[i] = 0.0;
            }
            a
        }
        None => st.initial_acceleration(&u, &v),
    };
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::PicardDivergence {
            time: 0.0,
            iterations: 0,
            update: f64::NAN,
        });
    }

    let steps = p.time.n_steps();
    let mut hu = Vec::with_capacity(steps + 1);
    let mut hv = Vec::with_capacity(steps + 1);
    let mut ha = Vec::with_capacity(steps + 1);
    let mut error = None;
    for k in 0..steps {
        if let Some(f) = st.frac.as_mut() {
            let l = st.lap.apply(&u, &v);
            for (i, x) in l.into_iter().enumerate() {
                f.lap[i].push(x);
            }
        }
        hu.push(u.clone());
        hv.push(v.clone());
        ha.push(a.clone());
        match st.step(&u, &v, &a, p.time.t(k)) {
            Ok((u1, v1, a1)) => {
                u = u1;
                v = v1;
                a = a1;
            }
            Err(e) => {
                error = Some(e);
                break;
            }
        }
    }
    let done = if error.is_none() {
        hu.push(u);
        hv.push(v);
        ha.push(a);
        steps
    } else {
        hu.len() - 1
    };
    if done == 0 {
        return Err(error.expect("a run without steps failed"));
    }
    let time = if done == steps {
        p.time
    } else {
        hu.truncate(done + 1);
        hv.truncate(done + 1);
        ha.truncate(done + 1);
        crate::domain::TimeAxis::new(p.time.t(done), done)?
    };
    let history = FieldHistory::new(p.model.tag(), p.medium, p.grid, time, hu, hv, ha)?;
    Ok(PartialRun { history, error })
}
