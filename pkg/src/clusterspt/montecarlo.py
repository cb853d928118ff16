"""Markov-chain samplers and free-energy estimators for :class:`SpinModel`.

Kernels are compiled with numba and work on a CSR layout of the model: for
every term the list of its variables, for every variable the list of its
terms.  A cache of term products makes single-spin moves O(degree).

Random numbers come from numba's internal generator, seeded per chain from
an integer drawn out of a ``numpy.random.SeedSequence``; a chain is
therefore reproducible from its recorded seed.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .classical import SpinModel

METROPOLIS, WOLFF, HYBRID = "metropolis", "wolff", "hybrid"
_METHOD_CODE = {METROPOLIS: 0, WOLFF: 1, HYBRID: 2}
MIN_BLOCKS = 32


class McError(ValueError):
    pass


# -- compiled model ------------------------------------------------------------

@dataclass(frozen=True)
class CompiledModel:
    n_vars: int
    K: np.ndarray
    t_ptr: np.ndarray
    t_var: np.ndarray
    v_ptr: np.ndarray
    v_term: np.ndarray
    mag_w: np.ndarray
    pairwise_ferro: bool


def _csr(groups, n_rows=None):
    ptr = np.zeros(len(groups) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(g) for g in groups])
    flat = np.fromiter((v for g in groups for v in g), dtype=np.int64, count=int(ptr[-1]))
    return ptr, flat


def compile_model(model: SpinModel) -> CompiledModel:
    if model.parity_constraints:
        raise McError("parity-constrained models can only be enumerated exactly")
    V = model.n_vars
    t_ptr, t_var = _csr(model.term_vars)
    per_var = [[] for _ in range(V)]
    for t, vs in enumerate(model.term_vars):
        for v in vs:
            per_var[v].append(t)
    v_ptr, v_term = _csr(per_var)
    live = [(k, v) for k, v in zip(model.K, model.term_vars) if k != 0 and len(v) > 0]
    ferro = all(len(v) == 2 and k > 0 for k, v in live)
    return CompiledModel(V, np.asarray(model.K, dtype=np.float64), t_ptr, t_var, v_ptr, v_term,
                         model.magnetization_weights(), ferro)


# -- kernels -------------------------------------------------------------------

@numba.njit(cache=True)
def _seed(s):
    np.random.seed(s)


@numba.njit(cache=True)
def _term_values(sigma, t_ptr, t_var):
    T = len(t_ptr) - 1
    out = np.empty(T, dtype=np.int8)
    for t in range(T):
        p = 1
        for a in range(t_ptr[t], t_ptr[t + 1]):
            p *= sigma[t_var[a]]
        out[t] = p
    return out


@numba.njit(cache=True)
def _energy(K, tval):
    e = 0.0
    for t in range(len(K)):
        e -= K[t] * tval[t]
    return e


@numba.njit(cache=True)
def _metropolis(sigma, tval, K, v_ptr, v_term, n_sweeps, energy):
    V = len(sigma)
    for _ in range(n_sweeps):
        for _k in range(V):
            # random site order keeps the chain reversible and aperiodic
            i = np.random.randint(V)
            d = 0.0
            for a in range(v_ptr[i], v_ptr[i + 1]):
                t = v_term[a]
                d += K[t] * tval[t]
            dE = 2.0 * d
            if dE <= 0.0 or np.random.random() < np.exp(-dE):
                sigma[i] = -sigma[i]
                for a in range(v_ptr[i], v_ptr[i + 1]):
                    t = v_term[a]
                    tval[t] = -tval[t]
                energy += dE
    return energy


@numba.njit(cache=True)
def _wolff(sigma, tval, K, pact, t_ptr, t_var, v_ptr, v_term, n_clusters, energy, work):
    """Grow and flip ``n_clusters`` clusters.  Returns ``(energy, clusters, flipped)``.

    The count must not depend on the state: stopping once enough spins have
    flipped would bias measurements."""
    V = len(sigma)
    incl = work[0]
    stack = work[1]
    members = work[2]
    flipped = 0
    clusters = 0
    while clusters < n_clusters:
        s0 = np.random.randint(V)
        incl[s0] = 1
        stack[0] = s0
        sp = 1
        nm = 0
        while sp > 0:
            sp -= 1
            i = stack[sp]
            members[nm] = i
            nm += 1
            for a in range(v_ptr[i], v_ptr[i + 1]):
                t = v_term[a]
                if pact[t] <= 0.0:
                    continue
                j = t_var[t_ptr[t]]
                if j == i:
                    j = t_var[t_ptr[t] + 1]
                if incl[j] == 0 and sigma[j] == sigma[i] and np.random.random() < pact[t]:
                    incl[j] = 1
                    stack[sp] = j
                    sp += 1
        for k in range(nm):
            i = members[k]
            incl[i] = 0
            sigma[i] = -sigma[i]
            for a in range(v_ptr[i], v_ptr[i + 1]):
                t = v_term[a]
                old = tval[t]
                tval[t] = -old
                energy += 2.0 * K[t] * old
        flipped += nm
        clusters += 1
    return energy, clusters, flipped


@numba.njit(cache=True)
def _probe_values(sigma, p_ptr, g_ptr, g_var, g_coef, q_ptr, q_var, out):
    n_prod = len(p_ptr) - 1
    for k in range(n_prod):
        acc = 0.0
        for g in range(p_ptr[k], p_ptr[k + 1]):
            p = 1
            for a in range(g_ptr[g], g_ptr[g + 1]):
                p *= sigma[g_var[a]]
            acc += g_coef[g] * p
        out[k] = acc
    for k in range(len(q_ptr) - 1):
        first = sigma[q_var[q_ptr[k]]]
        eq = 1.0
        for a in range(q_ptr[k] + 1, q_ptr[k + 1]):
            if sigma[q_var[a]] != first:
                eq = 0.0
                break
        out[n_prod + k] = eq


@numba.njit(cache=True)
def _run(sigma, tval, K, pact, t_ptr, t_var, v_ptr, v_term, mag_w, method, n_therm, n_meas,
         energy, p_ptr, g_ptr, g_var, g_coef, q_ptr, q_var, n_probe):
    V = len(sigma)
    work = np.zeros((3, V), dtype=np.int64)
    E = np.empty(n_meas)
    M = np.empty(n_meas)
    P = np.empty((n_meas, n_probe))
    buf = np.empty(n_probe)
    clusters = 0
    flipped = 0
    # clusters per sweep: fixed after the first half of thermalization so
    # that roughly V spins flip per sweep on average
    per_sweep = 1
    for s in range(n_therm + n_meas):
        if method != 1:
            energy = _metropolis(sigma, tval, K, v_ptr, v_term, 1, energy)
        if method != 0:
            energy, c, f = _wolff(sigma, tval, K, pact, t_ptr, t_var, v_ptr, v_term, per_sweep, energy, work)
            clusters += c
            flipped += f
            if s < n_therm // 2:
                per_sweep = max(1, int(round(V * clusters / flipped)))
        if s >= n_therm:
            r = s - n_therm
            E[r] = energy
            m = 0.0
            for i in range(V):
                m += mag_w[i] * sigma[i]
            M[r] = m
            if n_probe > 0:
                _probe_values(sigma, p_ptr, g_ptr, g_var, g_coef, q_ptr, q_var, buf)
                for k in range(n_probe):
                    P[r, k] = buf[k]
    return energy, E, M, P, clusters, flipped


# -- public sampling API -----------------------------------------------------------

@dataclass
class SpinConfig:
    """Spins for every (merged) variable with a cached energy."""
    sigma: np.ndarray
    energy: float
    tval: np.ndarray = field(repr=False)

    @classmethod
    def initial(cls, cm: CompiledModel, kind="cold", seed: int = 0) -> "SpinConfig":
        if kind == "cold":
            sigma = np.ones(cm.n_vars, dtype=np.int8)
        else:
            rng = np.random.default_rng(seed)
            sigma = rng.choice(np.array([-1, 1], dtype=np.int8), size=cm.n_vars)
        tval = _term_values(sigma, cm.t_ptr, cm.t_var)
        return cls(sigma, float(_energy(cm.K, tval)), tval)

    def drift(self, cm: CompiledModel) -> float:
        """``|cached - recomputed|`` energy after updates."""
        tval = _term_values(self.sigma, cm.t_ptr, cm.t_var)
        return abs(self.energy - float(_energy(cm.K, tval)))


def _as_compiled(model):
    return model if isinstance(model, CompiledModel) else compile_model(model)


def _draw_seed(rng) -> int:
    return int(rng.integers(0, 2**62))


def metropolis_sweep(config: SpinConfig, model, rng: np.random.Generator, n_sweeps: int = 1) -> SpinConfig:
    cm = _as_compiled(model)
    _seed(_draw_seed(rng))
    config.energy = _metropolis(config.sigma, config.tval, cm.K, cm.v_ptr, cm.v_term, n_sweeps, config.energy)
    return config


def _check_wolff(cm: CompiledModel):
    if not cm.pairwise_ferro:
        raise McError("Wolff updates need pairwise couplings >= 0 and no field")


def wolff_update(config: SpinConfig, model, rng: np.random.Generator) -> SpinConfig:
    """Flip one Wolff cluster."""
    cm = _as_compiled(model)
    _check_wolff(cm)
    _seed(_draw_seed(rng))
    work = np.zeros((3, cm.n_vars), dtype=np.int64)
    pact = -np.expm1(-2.0 * cm.K)
    config.energy, _, _ = _wolff(config.sigma, config.tval, cm.K, pact, cm.t_ptr, cm.t_var,
                                 cm.v_ptr, cm.v_term, 1, config.energy, work)
    return config


@dataclass
class Samples:
    energy: np.ndarray
    magnetization: np.ndarray
    probes: np.ndarray
    seed: int
    n_therm: int
    method: str
    drift: float
    final: np.ndarray = field(repr=False)
    mean_cluster: float = float("nan")


def sample(model, n_meas: int, n_therm: int = 0, method: str = METROPOLIS, seed: int = 0,
           probes=(), equal_probes=(), init="cold", start=None) -> Samples:
    """Run one chain, recording energy, flavor-0 magnetization and probes.

    ``probes`` is a list of weighted product sums, each a list of
    ``(coef, vars)``; ``equal_probes`` are variable groups whose indicator
    "all spins equal" is recorded.  Variables are model (merged) indices.
    """
    if method not in _METHOD_CODE:
        raise McError(f"unknown method {method!r}")
    cm = _as_compiled(model)
    if method != METROPOLIS:
        _check_wolff(cm)
    cfg = SpinConfig.initial(cm, init, seed) if start is None else start
    groups, coefs, per_probe = [], [], []
    for pr in probes:
        per_probe.append(len(pr))
        for c, vs in pr:
            groups.append(tuple(vs))
            coefs.append(float(c))
    p_ptr = np.zeros(len(per_probe) + 1, dtype=np.int64)
    p_ptr[1:] = np.cumsum(per_probe)
    g_ptr, g_var = _csr(groups)
    q_ptr, q_var = _csr([tuple(g) for g in equal_probes])
    n_probe = len(per_probe) + len(equal_probes)
    pact = -np.expm1(-2.0 * np.maximum(cm.K, 0.0))
    _seed(int(seed))
    energy, E, M, P, clusters, flipped = _run(
        cfg.sigma, cfg.tval, cm.K, pact, cm.t_ptr, cm.t_var, cm.v_ptr, cm.v_term, cm.mag_w,
        _METHOD_CODE[method], int(n_therm), int(n_meas), cfg.energy,
        p_ptr, g_ptr, g_var, np.asarray(coefs, dtype=np.float64), q_ptr, q_var, n_probe)
    cfg.energy = energy
    mc = flipped / clusters if clusters else float("nan")
    return Samples(E, M, P, int(seed), int(n_therm), method, cfg.drift(cm), cfg.sigma.copy(), mc)


def chain_seeds(seed: int, n: int) -> list[int]:
    """Independent per-chain integer seeds from one master seed."""
    return [int(s.generate_state(1, dtype=np.uint64)[0] >> 2) for s in np.random.SeedSequence(seed).spawn(n)]


def run_parallel(fn, jobs, workers: int = 1):
    """Map ``fn`` over ``jobs`` keeping input order; processes when ``workers > 1``."""
    if workers <= 1:
        return [fn(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*jobs)))


# -- statistics --------------------------------------------------------------------

@dataclass
class McEstimate:
    value: float
    standard_error: float
    sweeps: int = 0
    thermalization: int = 0
    seed: int | None = None
    method: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"value": self.value, "standard_error": self.standard_error, "sweeps": self.sweeps,
                "thermalization": self.thermalization, "seed": self.seed, "method": self.method,
                **{k: v for k, v in self.extra.items() if np.isscalar(v)}}


def block_means(x: np.ndarray, n_blocks: int = MIN_BLOCKS) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if n_blocks < MIN_BLOCKS:
        raise McError(f"need at least {MIN_BLOCKS} blocks")
    b = len(x) // n_blocks
    if b == 0:
        raise McError(f"{len(x)} samples cannot fill {n_blocks} blocks")
    return x[: b * n_blocks].reshape(n_blocks, b, *x.shape[1:]).mean(axis=1)


def blocked_error(x, n_blocks: int = MIN_BLOCKS) -> tuple[float, float]:
    bm = block_means(x, n_blocks)
    return float(np.mean(x)), float(np.std(bm, ddof=1) / math.sqrt(len(bm)))


def jackknife(fn, columns, n_blocks: int = MIN_BLOCKS) -> tuple[float, float]:
    """Blocked jackknife of ``fn(*means)`` for a function of several averages."""
    bms = [block_means(c, n_blocks) for c in columns]
    full = fn(*[b.mean(axis=0) for b in bms])
    nb = len(bms[0])
    tot = [b.sum(axis=0) for b in bms]
    loo = np.array([fn(*[(t - b[i]) / (nb - 1) for t, b in zip(tot, bms)]) for i in range(nb)])
    err = math.sqrt((nb - 1) / nb * float(np.sum((loo - loo.mean()) ** 2)))
    return float(full), err


def binder(m2, m4) -> float:
    return 1.0 - m4 / (3.0 * m2 * m2)


def integrated_autocorrelation(x: np.ndarray, window_c: float = 6.0) -> float:
    """Sokal windowed estimate of tau_int (in sweeps)."""
    x = np.asarray(x, dtype=float) - np.mean(x)
    n = len(x)
    f = np.fft.rfft(x, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n]
    if acf[0] == 0:
        return 0.5
    acf /= acf[0]
    tau = 0.5
    for w in range(1, n):
        tau += acf[w]
        if w >= window_c * tau:
            break
    return float(tau)


def observables(s: Samples) -> dict[str, tuple[float, float]]:
    """Energy, ``m^2``, ``|m|`` and Binder cumulant with blocked errors."""
    m2 = s.magnetization ** 2
    return {
        "energy": blocked_error(s.energy),
        "m2": blocked_error(m2),
        "absm": blocked_error(np.abs(s.magnetization)),
        "binder": jackknife(binder, [m2, m2 * m2]),
    }


# -- free energies ----------------------------------------------------------------

def _same_structure(a: SpinModel, b: SpinModel):
    if a.term_vars != b.term_vars or a.n_vars != b.n_vars:
        raise McError("models must share terms and variables (only couplings may differ)")


def free_energy_difference(model: SpinModel, target: SpinModel, schedule="ti", n_points: int = 12,
                           n_meas: int = 20000, n_therm: int = 2000, seed: int = 0,
                           method: str | None = None, workers: int = 1, min_ess: float = 0.1) -> McEstimate:
    """``F_target - F_model`` with ``F = -ln Z`` for models differing in couplings.

    ``schedule="ti"`` integrates ``<H_target - H_model>`` along the linear path
    with Gauss-Legendre nodes (``n_points``, or an explicit array of nodes in
    ``[0, 1]`` with weights), ``"fep"`` uses one-shot exponential reweighting
    from the model ensemble and is refused when the effective sample size
    falls below ``min_ess``.
    """
    _same_structure(model, target)
    dK = np.asarray(target.K) - np.asarray(model.K)
    idx = np.nonzero(dK)[0]
    if len(idx) == 0:
        return McEstimate(0.0, 0.0, 0, 0, seed, "identical")
    dH = [(-dK[t], model.term_vars[t]) for t in idx]
    if method is None:
        ok = all(compile_model(m).pairwise_ferro for m in (model, target))
        method = HYBRID if ok else METROPOLIS
    if schedule == "fep":
        s = sample(model, n_meas, n_therm, method, seed, probes=[dH])
        x = -s.probes[:, 0]
        shift = x.max()
        w = np.exp(x - shift)
        ess = float(w.sum() ** 2 / (w * w).sum() / len(w))
        if ess < min_ess:
            raise McError(f"effective sample size {ess:.3g} below {min_ess}: use thermodynamic integration")
        val, err = jackknife(lambda mw: -(math.log(mw) + shift), [w])
        return McEstimate(val, err, n_meas, n_therm, seed, "perturbation", {"ess": ess})
    if isinstance(schedule, str):
        if schedule != "ti":
            raise McError(f"unknown schedule {schedule!r}")
        x, wq = np.polynomial.legendre.leggauss(n_points)
        lams, wts = (x + 1) / 2, wq / 2
    else:
        lams, wts = (np.asarray(a, dtype=float) for a in schedule)
    seeds = chain_seeds(seed, len(lams))
    jobs = []
    for lam, sd in zip(lams, seeds):
        m = _interpolate(model, target, lam)
        jobs.append((m, n_meas, n_therm, method, sd, [dH]))
    results = run_parallel(_ti_point, jobs, workers)
    means = np.array([r[0] for r in results])
    errs = np.array([r[1] for r in results])
    val = float(np.dot(wts, means))
    err = float(math.sqrt(np.dot(wts ** 2, errs ** 2)))
    points = [{"lambda": float(l), "weight": float(w), "mean_dH": float(a), "se": float(b), "seed": sd}
              for l, w, a, b, sd in zip(lams, wts, means, errs, seeds)]
    return McEstimate(val, err, n_meas, n_therm, seed, "lambda-integration",
                      {"points": points, "sampler": method})


def _interpolate(a: SpinModel, b: SpinModel, lam: float) -> SpinModel:
    from dataclasses import replace
    return replace(a, K=(1 - lam) * np.asarray(a.K) + lam * np.asarray(b.K))


def _ti_point(model, n_meas, n_therm, method, seed, probes):
    s = sample(model, n_meas, n_therm, method, seed, probes=probes)
    return blocked_error(s.probes[:, 0])


def boundary_correlator(model: SpinModel, u: int, u2: int, n_meas: int = 20000, n_therm: int = 2000,
                        seed: int = 0, method: str = METROPOLIS, flavor: int = 0) -> McEstimate:
    """``<s_u s_u'>`` in the given flavor."""
    if u == u2:
        return McEstimate(1.0, 0.0, 0, 0, seed, "trivial")
    a, b = model.var(u, flavor), model.var(u2, flavor)
    s = sample(model, n_meas, n_therm, method, seed, probes=[[(1.0, (a, b))]])
    v, e = blocked_error(s.probes[:, 0])
    return McEstimate(v, e, n_meas, n_therm, seed, method)


def staged_lock_ratio(model: SpinModel, classes, n_meas: int = 10000, n_therm: int = 1000,
                      seed: int = 0, workers: int = 1) -> McEstimate:
    """``ln(Z'/Z)`` where ``Z'`` forces each variable class to a common spin.

    Classes are imposed one at a time; stage ``k`` measures the probability
    that class ``k`` is already aligned in the ensemble with classes
    ``< k`` merged, and the log-ratios add up.
    """
    from .classical import merge_vars
    classes = [list(c) for c in classes if len(set(c)) > 1]
    if not classes:
        return McEstimate(0.0, 0.0, 0, 0, seed, "perturbation")
    seeds = chain_seeds(seed, len(classes))
    jobs = []
    current = model
    for cls, sd in zip(classes, seeds):
        # translate original indices of the class into the current model
        base = model.var_map or tuple(range(model.n_original))
        inv = {}
        for o, c in enumerate(base):
            inv.setdefault(c, o)
        group = tuple(sorted({current.var_map[inv[v]] if current.var_map else v for v in cls}))
        jobs.append((current, n_meas, n_therm, sd, group))
        current = merge_vars(current, [group])
    results = run_parallel(_lock_stage, jobs, workers)
    total, var = 0.0, 0.0
    stages = []
    for (r, e), sd in zip(results, seeds):
        if r <= 0:
            raise McError("a stage never observed aligned spins; use more sweeps")
        total += math.log(r)
        var += (e / r) ** 2
        stages.append({"ratio": r, "se": e, "seed": sd})
    return McEstimate(total, math.sqrt(var), n_meas, n_therm, seed, "perturbation", {"stages": stages})


def _lock_stage(model, n_meas, n_therm, seed, group):
    if len(group) < 2:
        return 1.0, 0.0
    s = sample(model, n_meas, n_therm, METROPOLIS, seed, equal_probes=[group])
    return blocked_error(s.probes[:, 0])


# -- critical point ---------------------------------------------------------------

@dataclass
class CriticalEstimate:
    p_c: float | None
    standard_error: float
    in_range: bool
    pair_crossings: list
    table: list  # rows (L, p, U4, se)

    def to_dict(self) -> dict:
        return {"p_c": self.p_c, "standard_error": self.standard_error, "in_range": self.in_range,
                "pair_crossings": self.pair_crossings}


def _crossing(p, ua, ub):
    d = np.asarray(ua) - np.asarray(ub)
    for i in range(len(p) - 1):
        if d[i] == 0:
            return float(p[i])
        if d[i] * d[i + 1] < 0:
            return float(p[i] + (p[i + 1] - p[i]) * d[i] / (d[i] - d[i + 1]))
    return None


def binder_point(model: SpinModel, n_meas: int, n_therm: int, seed: int, method: str):
    s = sample(model, n_meas, n_therm, method, seed)
    return observables(s)["binder"]


def locate_critical_point(family, sizes, p_grid, n_meas: int = 20000, n_therm: int = 2000,
                          seed: int = 0, method: str = HYBRID, workers: int = 1,
                          n_boot: int = 400) -> CriticalEstimate:
    """Binder-cumulant crossing of ``family(L, p) -> SpinModel`` over sizes.

    The estimate averages the crossings of all size pairs; the error is the
    spread of that average under Gaussian resampling of every ``U4`` point.
    """
    sizes = sorted(sizes)
    p_grid = np.sort(np.asarray(p_grid, dtype=float))
    if len(sizes) < 3:
        raise McError("need at least three sizes")
    if len(p_grid) < 2:
        raise McError("need at least two grid points")
    seeds = chain_seeds(seed, len(sizes) * len(p_grid))
    jobs = []
    for i, L in enumerate(sizes):
        for j, p in enumerate(p_grid):
            jobs.append((family(L, float(p)), n_meas, n_therm, seeds[i * len(p_grid) + j], method))
    res = run_parallel(binder_point, jobs, workers)
    U = np.array([r[0] for r in res]).reshape(len(sizes), len(p_grid))
    E = np.array([r[1] for r in res]).reshape(len(sizes), len(p_grid))
    table = [(L, float(p), float(U[i, j]), float(E[i, j]))
             for i, L in enumerate(sizes) for j, p in enumerate(p_grid)]

    def estimate(Us):
        xs = [_crossing(p_grid, Us[a], Us[b]) for a in range(len(sizes)) for b in range(a + 1, len(sizes))]
        return xs

    pairs = estimate(U)
    if any(x is None for x in pairs):
        return CriticalEstimate(None, float("nan"), False, pairs, table)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_boot):
        xs = estimate(U + E * rng.standard_normal(U.shape))
        if all(x is not None for x in xs):
            boots.append(np.mean(xs))
    err = float(np.std(boots, ddof=1)) if len(boots) > 1 else float("nan")
    return CriticalEstimate(float(np.mean(pairs)), err, True, pairs, table)
