"""Monte Carlo for X_t and for the stochastic integral int eps*(t) dX_t.

The integrand is deterministic, so the integral is sampled through the Poisson
random measure of jumps in the coordinates (u, r) with u = eps*(t): the time
measure dt becomes g(u) du and a jump r xi contributes u r xi.  Scaled jumps
u r > jump_cutoff are drawn exactly (count, size and time); the rest are
replaced by a variance-matched Gaussian or dropped, with the compensator
carried in the drift.  Every moment of the kernel that appears is itself an
epsilon kernel at a shifted level:

    int u^k g_{alpha,m}(u) du over (a, b]  =  eps_{alpha-k,m}(a) - eps_{alpha-k,m}(b)

For alpha >= 0 the time horizon eps(0) is infinite and u is truncated below
at u_min = eps*(t_max).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import DomainViolation, InvalidCutoff
from .kernels import MappingParams, epsilon, epsilon_star
from .radial import RadialMeasure
from .triplet import LevyTriplet, char_exponent

BLOCK = 1024        # samples per RNG stream
TABLE = 4096        # inverse-CDF table size
U_MIN_DEFAULT = 1e-6
_TAIL_FRACTION = 1e-12


@dataclass(frozen=True)
class SimConfig:
    n_samples: int = 100_000
    jump_cutoff: float = 1e-2
    t_max: float | None = None
    seed: int = 0
    small_jump_mode: str = "gaussian"

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ValueError("n_samples must be a positive integer")
        if not (self.jump_cutoff > 0 and math.isfinite(self.jump_cutoff)):
            raise InvalidCutoff("jump_cutoff must be positive and finite")
        if self.t_max is not None and not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if self.small_jump_mode not in ("gaussian", "drift"):
            raise ValueError("small_jump_mode must be 'gaussian' or 'drift'")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        known = {"n_samples", "jump_cutoff", "t_max", "seed", "small_jump_mode"}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown SimConfig fields {sorted(extra)}")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


@dataclass
class SampleBatch:
    samples: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.samples.shape[0]

    def to_csv(self, path) -> None:
        d = self.samples.shape[1]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write("# provenance: " + json.dumps(self.provenance, sort_keys=True) + "\n")
            w = csv.writer(fh)
            w.writerow([f"x{i}" for i in range(d)])
            for row in self.samples:
                w.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path) -> "SampleBatch":
        with open(path, encoding="utf-8") as fh:
            head = fh.readline()
            prov = json.loads(head.split(":", 1)[1]) if head.startswith("# provenance:") else {}
            rows = list(csv.reader(fh))[1:]
        return cls(np.array(rows, dtype=float).reshape(len(rows), -1), prov)


# ---------------------------------------------------------------------------
# radial size tables

class _SizeTable:
    """Inverse CDF of the measure q(r) nu(dr) on (lo, inf).

    Built on a log grid by cumulative Simpson; a power-law tail past the last
    node (if any mass remains there) is drawn as a Pareto variable.
    """

    def __init__(self, nu: RadialMeasure, q, lo: float, total: float, kinks=()):
        self.atoms = [(r0, w * q(r0)) for r0, w in nu.atoms() if r0 > lo]
        self.atom_mass = sum(w for _, w in self.atoms)
        self.cont = max(total - self.atom_mass, 0.0)
        self.tail = 0.0
        if self.cont <= 0.0:
            return
        s_lo, s_hi = nu.support()
        a = max(lo, s_lo)
        b = s_hi
        if not math.isfinite(b):
            b = a * 10.0
            while b < 1e300 and nu.measure(b, math.inf) * q(b) > _TAIL_FRACTION * total:
                b *= 10.0
        x = np.linspace(math.log(a), math.log(b), TABLE)
        extra = [math.log(k) for k in (*nu.breakpoints(), *kinks) if a < k < b]
        if extra:
            x = np.unique(np.concatenate([x, extra, np.nextafter(extra, -np.inf)]))
        r = np.exp(x)
        f = np.array([nu.rho(float(v)) * q(float(v)) for v in r]) * r
        f = np.where(np.isfinite(f), np.maximum(f, 0.0), 0.0)
        cdf = np.concatenate([[0.0], np.maximum.accumulate(cumulative_simpson(f, x=x))])
        if not math.isfinite(s_hi):
            p = nu.tail_power()
            self.tail = nu.measure(b, math.inf) * q(b) if p is not None else 0.0
            self.tail_power = p
        self.x, self.b = x, b
        self.cdf = cdf / cdf[-1] if cdf[-1] > 0 else cdf

    def draw(self, rng, n):
        out = np.empty(n)
        if n == 0:
            return out
        tot = self.atom_mass + self.cont
        v = rng.random(n) * tot
        pos = 0.0
        done = np.zeros(n, bool)
        for r0, w in self.atoms:
            sel = ~done & (v < pos + w)
            out[sel] = r0
            done |= sel
            pos += w
        k = int((~done).sum())
        if k:
            u = rng.random(k)
            vals = np.exp(np.interp(u, self.cdf, self.x))
            if self.tail > 0:
                ptail = self.tail / self.cont
                t = u > 1.0 - ptail
                # density ~ r^p beyond b: r = b U^(1/(p+1))
                vals[t] = self.b * rng.random(int(t.sum())) ** (1.0 / (self.tail_power + 1.0))
            out[~done] = vals
        return out


class _TimeTable:
    """u = eps*(t) for t in [0, eps(u_floor)], vectorised by interpolation in log u."""

    def __init__(self, p: MappingParams, u_floor: float):
        self.p = p
        lo = max(u_floor, 1e-300)
        L = np.concatenate([[0.0], np.geomspace(1e-9, math.log(1.0 / lo), 8191)])
        self.L = L
        self.eps = np.asarray(epsilon(p, np.exp(-L)), float)
        # equal t means equal u; keep eps strictly increasing for interp
        self.eps = np.maximum.accumulate(self.eps)

    def u_of(self, t):
        L = np.interp(t, self.eps, self.L)
        return np.exp(-L)

    def eps_of(self, u):
        return np.interp(np.log(1.0 / np.asarray(u, float)), self.L, self.eps)


# ---------------------------------------------------------------------------
# per-atom quantities in the (u, r) picture

def _eps_shift(p: MappingParams, k: int, u: float) -> float:
    """int_u^1 s^k g_{alpha,m}(s) ds."""
    q = MappingParams(p.alpha - k, p.m)
    if u <= 0.0:
        return q.eps0
    if u >= 1.0:
        return 0.0
    return float(epsilon(q, u))


def _atom_plan(nu: RadialMeasure, p: MappingParams, u_min: float, cut: float):
    """Jump rate, drift and small-jump variance of one radial under u-weighting on (u_min, 1]."""
    def low(r):
        # smallest u at which a jump of size r is big
        return min(1.0, max(u_min, cut / r))

    def q_rate(r):
        return _eps_shift(p, 0, low(r))

    kinks = tuple(k for k in (cut, cut / u_min if u_min > 0 else 0.0) if k > 0)
    f1, f2 = _eps_shift(p, 1, u_min), _eps_shift(p, 2, u_min)
    rate = nu.integrate(q_rate, cut, math.inf, points=kinks)
    comp_big = nu.integrate(lambda r: r / (1 + r * r) * _eps_shift(p, 1, low(r)), cut, math.inf,
                            points=kinks)
    drift_small = nu.integrate(lambda r: r ** 3 / (1 + r * r) * (f1 - _eps_shift(p, 1, low(r))),
                               0.0, math.inf, points=kinks)
    var_small = nu.integrate(lambda r: r * r * (f2 - _eps_shift(p, 2, low(r))), 0.0, math.inf,
                             points=kinks)
    sizes = _SizeTable(nu, q_rate, cut, rate, kinks) if rate > 0 else None
    return {"rate": rate, "drift": drift_small - comp_big, "var": var_small, "sizes": sizes,
            "u_min": u_min, "cut": cut}


def _unit_plan(nu: RadialMeasure, dt: float, cut: float):
    """Same quantities for the plain increment X_dt (u = 1 on a time interval of length dt)."""
    rate = dt * nu.measure(cut, math.inf)
    comp_big = dt * nu.integrate(lambda r: r / (1 + r * r), cut, math.inf, points=(cut,))
    drift_small = dt * nu.integrate(lambda r: r ** 3 / (1 + r * r), 0.0, cut, points=(cut,))
    var_small = dt * nu.integrate(lambda r: r * r, 0.0, cut, points=(cut,))
    sizes = _SizeTable(nu, lambda r: 1.0, cut, rate / dt) if rate > 0 else None
    return {"rate": rate, "drift": drift_small - comp_big, "var": var_small, "sizes": sizes}


# ---------------------------------------------------------------------------
# sampling engine

def _streams(seed: int, n: int):
    """(start, stop, Generator) per block; stream keyed by (seed, block index)."""
    for b, start in enumerate(range(0, n, BLOCK)):
        ss = np.random.SeedSequence(int(seed), spawn_key=(b,))
        yield start, min(n, start + BLOCK), np.random.Generator(np.random.Philox(ss))


def _draw(t: LevyTriplet, plans, cov, drift, n, rng, times):
    d = t.dim
    x = np.tile(drift, (n, 1))
    if np.any(cov):
        L = _psd_factor(cov)
        x += rng.standard_normal((n, d)) @ L.T
    for at, plan in zip(t.levy, plans):
        lam = at.w * plan["rate"]
        if lam <= 0:
            continue
        counts = rng.poisson(lam, n)
        tot = int(counts.sum())
        if tot == 0:
            continue
        r = plan["sizes"].draw(rng, tot)
        if times is not None:
            lows = np.minimum(1.0, np.maximum(plan["u_min"], plan["cut"] / r))
            tmax = times.eps_of(lows)
            u = times.u_of(rng.random(tot) * tmax)
            y = u * r
        else:
            y = r
        owner = np.repeat(np.arange(n), counts)
        amp = np.bincount(owner, weights=y, minlength=n)
        x += amp[:, None] * at.xi[None, :]
    return x


def _psd_factor(S):
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    return V * np.sqrt(np.clip(w, 0.0, None))


def sample_levy_increment(t: LevyTriplet, dt: float, cfg: SimConfig, rng=None, size=None):
    """X_dt (or ``size`` independent copies) with jumps below ``cfg.jump_cutoff`` substituted."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    cov, drift, plans = _increment_parts(t, dt, cfg)
    n = 1 if size is None else int(size)
    x = _draw(t, plans, cov, drift, n, rng, None)
    return x[0] if size is None else x


def _increment_parts(t, dt, cfg):
    cut = cfg.jump_cutoff
    cov = dt * np.array(t.A, float)
    drift = dt * np.array(t.gamma, float)
    plans = []
    for at in t.levy:
        plan = _unit_plan(at.radial, dt, cut)
        drift += at.w * plan["drift"] * at.xi
        if cfg.small_jump_mode == "gaussian":
            cov += at.w * plan["var"] * np.outer(at.xi, at.xi)
        plans.append(plan)
    return cov, drift, plans


def horizon(p: MappingParams, cfg: SimConfig):
    """(u_min, T): lower u cut and the corresponding time horizon."""
    if p.alpha < 0 and cfg.t_max is None:
        return 0.0, p.eps0
    if cfg.t_max is None:
        return U_MIN_DEFAULT, float(epsilon(p, U_MIN_DEFAULT))
    T = min(cfg.t_max, p.eps0)
    return (0.0 if T >= p.eps0 else float(epsilon_star(p, T))), T


def simulate_phi_integral(t: LevyTriplet, p, cfg: SimConfig) -> SampleBatch:
    """Samples of int_0^T eps*_{alpha,m}(s) dX_s."""
    from .phi import _params, check_domain
    from .serialization import triplet_hash
    p = _params(p)
    rep = check_domain(t, p)
    if not rep.in_domain:
        raise DomainViolation(f"not in the domain: {rep.reason}")
    u_min, T = horizon(p, cfg)
    cut = cfg.jump_cutoff
    f1, f2 = _eps_shift(p, 1, u_min), _eps_shift(p, 2, u_min)
    cov = f2 * np.array(t.A, float)
    drift = f1 * np.array(t.gamma, float)
    plans = []
    for at in t.levy:
        plan = _atom_plan(at.radial, p, u_min, cut)
        drift += at.w * plan["drift"] * at.xi
        if cfg.small_jump_mode == "gaussian":
            cov += at.w * plan["var"] * np.outer(at.xi, at.xi)
        plans.append(plan)
    times = _TimeTable(p, u_min if u_min > 0 else 1e-300)
    out = np.empty((cfg.n_samples, t.dim))
    for start, stop, rng in _streams(cfg.seed, cfg.n_samples):
        out[start:stop] = _draw(t, plans, cov, drift, stop - start, rng, times)
    # mass of the integrand left out below u_min
    neglected = {"drift_weight": _eps_shift(p, 1, 0.0) - f1 if u_min > 0 else 0.0,
                 "variance_weight": _eps_shift(p, 2, 0.0) - f2 if u_min > 0 else 0.0}
    prov = {"triplet_hash": triplet_hash(t), "params": p.to_dict(), "config": cfg.to_dict(),
            "horizon": T if math.isfinite(T) else "inf", "u_min": u_min,
            "truncation_bias_bound": neglected,
            "jump_rates": [at.w * pl["rate"] for at, pl in zip(t.levy, plans)],
            "small_jump_variance": [at.w * pl["var"] for at, pl in zip(t.levy, plans)]}
    return SampleBatch(out, prov)


# ---------------------------------------------------------------------------
# characteristic-function comparison

def empirical_cf(batch: SampleBatch, z_grid):
    """(phi_hat, se) per z: sample mean of exp(i<z,x>) and sqrt((1 - |phi_hat|^2) / n)."""
    x = np.asarray(batch.samples, float)
    n, d = x.shape
    zs = np.asarray(z_grid, float)
    if zs.ndim == 1:
        zs = zs[:, None] if d == 1 else zs[None, :]
    phase = x @ zs.T
    phi = np.cos(phase).mean(axis=0) + 1j * np.sin(phase).mean(axis=0)
    se = np.sqrt(np.clip(1.0 - np.abs(phi) ** 2, 0.0, None) / n)
    return phi, se


def _allowed_exceedances(n_z: int, p_tail: float = 0.0027, q: float = 0.99) -> int:
    """99% quantile of Binomial(n_z, P(|N(0,1)| > 3))."""
    from scipy.stats import binom
    return int(binom.ppf(q, n_z, p_tail))


def mc_compare(t: LevyTriplet, p, cfg: SimConfig, z_grid, target: LevyTriplet | None = None) -> dict:
    """Empirical CF of the simulated integral vs exp(char_exponent(apply_phi(t, p)))."""
    from .phi import _params, apply_phi
    p = _params(p)
    mapped = apply_phi(t, p) if target is None else target
    batch = simulate_phi_integral(t, p, cfg)
    phi_hat, se = empirical_cf(batch, z_grid)
    zs = np.asarray(z_grid, float)
    if zs.ndim == 1:
        zs = zs[:, None] if t.dim == 1 else zs[None, :]
    exact = np.array([np.exp(char_exponent(mapped, z)) for z in zs])
    dev = np.abs(phi_hat - exact)
    exceed = dev > 3.0 * se + 1e-12
    allowed = _allowed_exceedances(len(zs))
    return {"pass": bool(exceed.sum() <= allowed), "exceedances": int(exceed.sum()),
            "allowed": allowed, "n_samples": batch.n,
            "z": zs.tolist(), "empirical": [[c.real, c.imag] for c in phi_hat],
            "exact": [[c.real, c.imag] for c in exact], "se": se.tolist(),
            "deviation_over_se": (dev / np.where(se > 0, se, np.inf)).tolist(),
            "provenance": batch.provenance}
