"""Constrained differential evolution over the 17-parameter scenario space and
seeded Monte Carlo stress tests of the monogamy bounds.

Every random draw comes from a counter-based substream keyed by its logical
position (generation and member for the evolver, chunk index for the Monte
Carlo sampler), so results are bit-identical for a fixed seed no matter how
many workers evaluate the population.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache, partial

import numpy as np

from .metrics import Scenario, chsh_value, proxy_12, proxy_21, proxy_22
from .states import MeasurementPolicy, pure_state
from .observables import make_observable

__all__ = [
    "N_PARAMS",
    "PARAM_LOWER",
    "PARAM_UPPER",
    "DEConfig",
    "GenerationRecord",
    "OptimizeResult",
    "SweepPoint",
    "SweepResult",
    "MonteCarloSummary",
    "decode",
    "encode",
    "optimize",
    "problem_functions",
    "sweep_frontier",
    "monte_carlo_bounds",
]

# Each observable block is (u, v, theta, phi): strength = u, bias = v(1 - u),
# direction from the spherical angles.  Block order X, X', Y, Y', then alpha.
N_PARAMS = 17
PARAM_LOWER = np.array([0.0, -1.0, 0.0, 0.0] * 4 + [0.0])
PARAM_UPPER = np.array([1.0, 1.0, np.pi, 2.0 * np.pi] * 4 + [np.pi / 2])
PARAM_NAMES = tuple(
    f"{obs}_{coord}" for obs in ("x", "xp", "y", "yp") for coord in ("u", "v", "theta", "phi")
) + ("alpha",)
for _arr in (PARAM_LOWER, PARAM_UPPER):
    _arr.flags.writeable = False

# substream namespaces
_TAG_INIT, _TAG_GEN, _TAG_MEMBER, _TAG_WARM, _TAG_POINT, _TAG_MC = range(6)

_MC_CHUNK = 4096


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


# ---------------------------------------------------------------------------
# parameter vector <-> scenario


def _direction_from_angles(theta: float, phi: float) -> tuple[float, float, float]:
    return (
        math.sin(theta) * math.cos(phi),
        math.sin(theta) * math.sin(phi),
        math.cos(theta),
    )


def decode(p) -> Scenario:
    """Decode a 17-vector into a Scenario with unbiased selection on both sides.

    Decoding is total: out-of-bounds coordinates are clamped to the bounds and
    flagged with a RuntimeWarning.  The block encoding guarantees
    |bias| + strength <= 1 for every decoded observable.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (N_PARAMS,):
        raise ValueError(f"parameter vector must have {N_PARAMS} entries, got shape {p.shape}")
    clipped = np.clip(p, PARAM_LOWER, PARAM_UPPER)
    if np.any(clipped != p):
        warnings.warn("out-of-bounds parameter coordinates clamped to bounds", RuntimeWarning)
    obs = []
    for i in range(4):
        u, v, theta, phi = clipped[4 * i : 4 * i + 4]
        obs.append(make_observable(v * (1.0 - u), u, _direction_from_angles(theta, phi)))
    return Scenario(
        pure_state(float(clipped[16])),
        MeasurementPolicy(obs[0], obs[1], 0.5),
        MeasurementPolicy(obs[2], obs[3], 0.5),
    )


def _encode_block(obs) -> list[float]:
    u = obs.strength
    v = obs.bias / (1.0 - u) if 1.0 - u > 1e-15 else 0.0
    theta = math.acos(min(1.0, max(-1.0, float(obs.direction[2]))))
    phi = math.atan2(float(obs.direction[1]), float(obs.direction[0])) % (2.0 * math.pi)
    return [u, min(1.0, max(-1.0, v)), theta, phi]


def encode(scenario: Scenario) -> np.ndarray:
    """Inverse of decode for scenarios in the decodable family (unbiased
    selection, initial state in the one-parameter pure class)."""
    for name, pol in (("A", scenario.policy_a), ("B", scenario.policy_b)):
        if abs(pol.secondary_prob - 0.5) > 1e-12:
            raise ValueError(f"side {name} selection probability must be 1/2 to encode")
    state = scenario.initial_state
    alpha = 0.5 * math.acos(min(1.0, max(-1.0, float(state.bloch_a[2]))))
    expected = pure_state(alpha)
    mismatch = max(
        float(np.max(np.abs(state.bloch_a - expected.bloch_a))),
        float(np.max(np.abs(state.bloch_b - expected.bloch_b))),
        float(np.max(np.abs(state.corr - expected.corr))),
    )
    if mismatch > 1e-9:
        raise ValueError("initial state is not in the encodable pure family")
    coords: list[float] = []
    for obs in (
        scenario.policy_a.primary_obs,
        scenario.policy_a.secondary_obs,
        scenario.policy_b.primary_obs,
        scenario.policy_b.secondary_obs,
    ):
        coords.extend(_encode_block(obs))
    coords.append(alpha)
    return np.array(coords)


@lru_cache(maxsize=2048)
def _decode_bytes(buf: bytes) -> Scenario:
    return decode(np.frombuffer(buf, dtype=float))


def _decode_cached(p: np.ndarray) -> Scenario:
    # objective and constraint share one decode per candidate through this cache
    return _decode_bytes(np.ascontiguousarray(p, dtype=float).tobytes())


# ---------------------------------------------------------------------------
# optimization problems


def _s11_abs(p: np.ndarray) -> float:
    sc = _decode_cached(p)
    return abs(
        chsh_value(
            sc.policy_a.primary_obs,
            sc.policy_a.secondary_obs,
            sc.policy_b.primary_obs,
            sc.policy_b.secondary_obs,
            sc.initial_state,
        )
    )


def _proxy_22_of(p: np.ndarray) -> float:
    return proxy_22(_decode_cached(p))


def _proxy_21_of(p: np.ndarray) -> float:
    return proxy_21(_decode_cached(p))


def _proxy_12_of(p: np.ndarray) -> float:
    return proxy_12(_decode_cached(p))


def _passon_constraint(p: np.ndarray, s: float) -> float:
    return _s11_abs(p) - s


def _crossed_constraint(p: np.ndarray, s: float) -> float:
    return _proxy_12_of(p) - s


def problem_functions(problem: str, s: float):
    """(objective, constraint) pair for a frontier point.

    passon:  maximize the late-pair proxy subject to |s11| >= s.
    crossed: maximize the (A2,B1) proxy subject to the (A1,B2) proxy >= s.
    """
    if problem == "passon":
        return _proxy_22_of, partial(_passon_constraint, s=s)
    if problem == "crossed":
        return _proxy_21_of, partial(_crossed_constraint, s=s)
    raise ValueError(f"problem must be 'passon' or 'crossed', got {problem!r}")


# ---------------------------------------------------------------------------
# differential evolution with the feasibility rule


@dataclass(frozen=True)
class DEConfig:
    """Solver controls; the defaults are the desk-scale settings."""

    population_size: int = 100
    max_generations: int = 200
    recombination: float = 0.7
    mutation_range: tuple[float, float] = (0.5, 0.7)
    tolerance: float = 1e-5
    seed: int = 0
    worker_count: int = 1
    polish: bool = True

    def __post_init__(self):
        if self.population_size < 4:
            raise ValueError("population_size must be at least 4")
        if not 0.0 <= self.recombination <= 1.0:
            raise ValueError("recombination must lie in [0, 1]")
        lo, hi = self.mutation_range
        if not (0.0 <= lo <= hi <= 2.0):
            raise ValueError("mutation_range must be an ordered pair within [0, 2]")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_generations < 1:
            raise ValueError("max_generations must be at least 1")
        if self.worker_count < 1:
            raise ValueError("worker_count must be at least 1")


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    mutation_factor: float
    best_objective: float
    best_violation: float
    feasible_count: int
    objective_spread: float


@dataclass(frozen=True)
class OptimizeResult:
    best_vector: np.ndarray
    best_objective: float
    best_violation: float
    feasible: bool
    converged: bool
    generations_used: int
    trace: tuple[GenerationRecord, ...]


def _violation(constraint_value: float) -> float:
    return 0.0 if constraint_value >= 0.0 else -constraint_value


def _accepts(obj_new: float, viol_new: float, obj_old: float, viol_old: float) -> bool:
    """Feasibility rule, maximizing: feasible beats infeasible, feasibles
    compare by objective, infeasibles by violation; ties go to the challenger."""
    if viol_new == 0.0 and viol_old == 0.0:
        return obj_new >= obj_old
    if viol_new == 0.0 or viol_old == 0.0:
        return viol_new == 0.0
    return viol_new <= viol_old


def _improves(obj_new: float, viol_new: float, obj_old: float, viol_old: float) -> bool:
    """Strict version of the feasibility rule, for the polish loop."""
    if viol_new == 0.0 and viol_old == 0.0:
        return obj_new > obj_old
    if viol_new == 0.0 or viol_old == 0.0:
        return viol_new == 0.0
    return viol_new < viol_old


def _best_index(objs: np.ndarray, viols: np.ndarray) -> int:
    """Incumbent under the feasibility rule; with no feasible member the
    least-violating one serves as the base vector."""
    feasible = np.flatnonzero(viols == 0.0)
    if feasible.size:
        return int(feasible[np.argmax(objs[feasible])])
    return int(np.argmin(viols))


def _eval_vector(args):
    vec, objective, constraint = args
    obj = float(objective(vec))
    viol = 0.0 if constraint is None else _violation(float(constraint(vec)))
    return obj, viol


def _evaluate(vectors, objective, constraint, pool, chunksize):
    args = [(v, objective, constraint) for v in vectors]
    if pool is None:
        results = [_eval_vector(a) for a in args]
    else:
        results = list(pool.map(_eval_vector, args, chunksize=chunksize))
    objs = np.array([r[0] for r in results])
    viols = np.array([r[1] for r in results])
    return objs, viols


def _pick_two(rng: np.random.Generator, n: int, skip: int) -> tuple[int, int]:
    a, b = rng.choice(n - 1, size=2, replace=False)
    if a >= skip:
        a += 1
    if b >= skip:
        b += 1
    return int(a), int(b)


def _polish(vec, obj, viol, objective, constraint, lower, upper):
    """Derivative-free coordinate descent with shrinking steps.

    The objective is non-smooth at singular-value crossings, so no gradients:
    each coordinate is nudged by +-step under the strict feasibility rule and
    the step shrinks tenfold once a sweep stops improving.
    """
    step = 1e-2
    while step >= 1e-8:
        for _ in range(200):  # safety cap; each pass strictly improves
            improved = False
            for j in range(vec.size):
                for delta in (step, -step):
                    cand = vec.copy()
                    cand[j] = min(max(cand[j] + delta, lower[j]), upper[j])
                    if cand[j] == vec[j]:
                        continue
                    o, w = _eval_vector((cand, objective, constraint))
                    if _improves(o, w, obj, viol):
                        vec, obj, viol = cand, o, w
                        improved = True
                        break
            if not improved:
                break
        step *= 0.1
    return vec, obj, viol


def optimize(
    objective,
    constraint=None,
    config: DEConfig | None = None,
    initial_population=None,
    bounds: tuple[np.ndarray, np.ndarray] | None = None,
) -> OptimizeResult:
    """Maximize objective(p) subject to constraint(p) >= 0 by DE/best/1/bin.

    objective and constraint take a raw parameter vector; use decode (or the
    prebuilt problem_functions) for scenario-level quantities.  The mutation
    factor is redrawn uniformly from mutation_range each generation, crossover
    is binomial at the recombination rate, and selection follows the
    feasibility rule.  Terminates when the population objective spread falls
    below tolerance or max_generations is reached; an infeasible-only
    population is reported, never raised on.
    """
    config = config if config is not None else DEConfig()
    lower, upper = bounds if bounds is not None else (PARAM_LOWER, PARAM_UPPER)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    dim = lower.size
    n = config.population_size

    pop = np.empty((n, dim))
    seeded = 0
    if initial_population is not None:
        for vec in list(initial_population)[:n]:
            pop[seeded] = np.clip(np.asarray(vec, dtype=float), lower, upper)
            seeded += 1
    for k in range(seeded, n):
        pop[k] = _stream(config.seed, _TAG_INIT, k).uniform(lower, upper)

    pool = None
    chunksize = max(1, n // (4 * config.worker_count))
    try:
        if config.worker_count > 1:
            pool = ProcessPoolExecutor(max_workers=config.worker_count)
        objs, viols = _evaluate(pop, objective, constraint, pool, chunksize)
        best = _best_index(objs, viols)

        trace: list[GenerationRecord] = []
        converged = False
        generations_used = 0
        for gen in range(1, config.max_generations + 1):
            factor = float(_stream(config.seed, _TAG_GEN, gen).uniform(*config.mutation_range))
            trials = np.empty_like(pop)
            for i in range(n):
                rng = _stream(config.seed, _TAG_MEMBER, gen, i)
                r1, r2 = _pick_two(rng, n, i)
                mutant = pop[best] + factor * (pop[r1] - pop[r2])
                mask = rng.random(dim) < config.recombination
                mask[rng.integers(dim)] = True
                trials[i] = np.clip(np.where(mask, mutant, pop[i]), lower, upper)
            t_objs, t_viols = _evaluate(trials, objective, constraint, pool, chunksize)
            for i in range(n):
                if _accepts(t_objs[i], t_viols[i], objs[i], viols[i]):
                    pop[i] = trials[i]
                    objs[i] = t_objs[i]
                    viols[i] = t_viols[i]
            best = _best_index(objs, viols)
            spread = float(objs.max() - objs.min())
            trace.append(
                GenerationRecord(
                    generation=gen,
                    mutation_factor=factor,
                    best_objective=float(objs[best]),
                    best_violation=float(viols[best]),
                    feasible_count=int(np.count_nonzero(viols == 0.0)),
                    objective_spread=spread,
                )
            )
            generations_used = gen
            if spread < config.tolerance:
                converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()

    best_vec = pop[best].copy()
    best_obj = float(objs[best])
    best_viol = float(viols[best])
    if config.polish:
        best_vec, best_obj, best_viol = _polish(
            best_vec, best_obj, best_viol, objective, constraint, lower, upper
        )
    best_vec.flags.writeable = False
    return OptimizeResult(
        best_vector=best_vec,
        best_objective=best_obj,
        best_violation=best_viol,
        feasible=best_viol == 0.0,
        converged=converged,
        generations_used=generations_used,
        trace=tuple(trace),
    )


# ---------------------------------------------------------------------------
# frontier sweeps


@dataclass(frozen=True)
class SweepPoint:
    s: float
    best_objective: float
    best_vector: np.ndarray
    feasible: bool
    generations_used: int
    converged: bool


@dataclass(frozen=True)
class SweepResult:
    problem: str
    points: tuple[SweepPoint, ...]
    # s values where a completed passon sweep fails to be non-increasing,
    # indicating a non-converged earlier point
    monotone_flags: tuple[float, ...]


_TSIRELSON = 2.0 * math.sqrt(2.0)


def _feasible_anchor(problem: str, s: float) -> np.ndarray:
    """A deterministic constraint-satisfying vector for warm starts.

    Maximally entangled state, orthogonal directions on each side in the
    optimal CHSH arrangement; the strengths are scaled so the constrained
    quantity lands just above s (both constraints scale as 2 sqrt2 sigma^2 for
    passon and 2 sqrt2 sigma for crossed).
    """
    target = min(s + 0.02, _TSIRELSON)
    if problem == "passon":
        sigma = math.sqrt(target / _TSIRELSON)
        strengths = [sigma] * 4
    else:
        sigma = target / _TSIRELSON
        strengths = [sigma, sigma, 0.0, 0.0]
    s_x, s_xp, s_y, s_yp = strengths
    return np.array(
        [
            s_x, 0.0, 0.0, 0.0,                      # X along z
            s_xp, 0.0, math.pi / 2, 0.0,             # X' along x
            s_y, 0.0, math.pi / 4, 0.0,              # Y along (z+x)/sqrt2
            s_yp, 0.0, math.pi / 4, math.pi,         # Y' along (z-x)/sqrt2
            math.pi / 4,
        ]
    )


def _warm_members(problem: str, s: float, config: DEConfig, prev_best, point_index: int):
    """Half the population: previous best, the analytic anchor, and
    constraint-satisfying rejection samples."""
    _, constraint = problem_functions(problem, s)
    members = []
    if prev_best is not None:
        members.append(np.array(prev_best))
    members.append(_feasible_anchor(problem, s))
    n_warm = config.population_size // 2
    rng = _stream(config.seed, _TAG_WARM, point_index)
    for _ in range(20 * config.population_size):
        if len(members) >= n_warm:
            break
        cand = rng.uniform(PARAM_LOWER, PARAM_UPPER)
        if constraint(cand) >= 0.0:
            members.append(cand)
    return members[:n_warm]


def _point_seed(seed: int, point_index: int) -> int:
    state = np.random.SeedSequence(seed, spawn_key=(_TAG_POINT, point_index)).generate_state(
        1, dtype=np.uint64
    )
    return int(state[0])


def sweep_frontier(problem: str, s_values, config: DEConfig | None = None) -> SweepResult:
    """One constrained optimize run per constraint level, warm-started from the
    previous frontier point; infeasible levels are reported per point and the
    sweep continues."""
    config = config if config is not None else DEConfig()
    problem_functions(problem, 0.0)  # validates the problem name
    s_sorted = sorted(float(s) for s in s_values)
    if not s_sorted:
        raise ValueError("s_values must be nonempty")
    if any(b - a <= 0.0 for a, b in zip(s_sorted, s_sorted[1:])):
        raise ValueError("s_values must be strictly increasing after sorting")

    points: list[SweepPoint] = []
    prev_best = None
    for j, s in enumerate(s_sorted):
        objective, constraint = problem_functions(problem, s)
        warm = _warm_members(problem, s, config, prev_best, j)
        result = optimize(
            objective,
            constraint,
            replace(config, seed=_point_seed(config.seed, j)),
            initial_population=warm,
        )
        points.append(
            SweepPoint(
                s=s,
                best_objective=result.best_objective,
                best_vector=result.best_vector,
                feasible=result.feasible,
                generations_used=result.generations_used,
                converged=result.converged,
            )
        )
        if result.feasible:
            prev_best = result.best_vector

    flags: list[float] = []
    if problem == "passon":
        last = None
        for pt in points:
            if not pt.feasible:
                continue
            if last is not None and pt.best_objective > last + 1e-9:
                flags.append(pt.s)
            last = pt.best_objective
    return SweepResult(problem=problem, points=tuple(points), monotone_flags=tuple(flags))


# ---------------------------------------------------------------------------
# Monte Carlo stress tests


@dataclass(frozen=True)
class MonteCarloSummary:
    mode: str
    n: int
    seed: int
    max_s11_plus_s22: float
    argmax_s11_plus_s22: np.ndarray
    max_s12sq_plus_s21sq: float
    argmax_s12sq_plus_s21sq: np.ndarray
    worst_eq14_residual: float
    worst_eq13_residual: float


def _batch_directions(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _orthogonalize(vecs: np.ndarray, against: np.ndarray) -> np.ndarray:
    """Project each row of vecs off the matching row of against and normalize;
    near-parallel rows fall back to a deterministic axis construction."""
    proj = vecs - np.einsum("nj,nj->n", vecs, against)[:, None] * against
    norms = np.linalg.norm(proj, axis=1)
    degenerate = norms < 1e-8
    if np.any(degenerate):
        axes = np.eye(3)[np.argmin(np.abs(against[degenerate]), axis=1)]
        alt = axes - np.einsum("nj,nj->n", axes, against[degenerate])[:, None] * against[degenerate]
        proj[degenerate] = alt
        norms[degenerate] = np.linalg.norm(alt, axis=1)
    return proj / norms[:, None]


def _restrict_mode(params: np.ndarray, mode: str, chunk_index: int) -> np.ndarray:
    if mode == "free":
        return params
    if mode == "unbiased_singlet":
        params[:, 1:16:4] = 0.0
        return params
    # eq13_hypotheses: cycle the four hypothesis combinations by sample index
    idx = chunk_index * _MC_CHUNK + np.arange(params.shape[0])
    equal_strengths = (idx % 4) < 2
    unbiased = (idx % 2) == 0
    params[equal_strengths, 4] = params[equal_strengths, 0]
    params[equal_strengths, 12] = params[equal_strengths, 8]
    rows = ~equal_strengths
    for prim, sec in ((0, 1), (2, 3)):
        d_prim = _batch_directions(params[rows, 4 * prim + 2], params[rows, 4 * prim + 3])
        d_sec = _batch_directions(params[rows, 4 * sec + 2], params[rows, 4 * sec + 3])
        d_sec = _orthogonalize(d_sec, d_prim)
        params[rows, 4 * sec + 2] = np.arccos(np.clip(d_sec[:, 2], -1.0, 1.0))
        params[rows, 4 * sec + 3] = np.mod(np.arctan2(d_sec[:, 1], d_sec[:, 0]), 2.0 * np.pi)
    params[unbiased, 1:16:4] = 0.0
    # zero Bloch vectors: the only such member of the encodable state family
    params[~unbiased, 16] = np.pi / 4
    return params


def _batch_quantities(params: np.ndarray, use_singlet: bool) -> tuple[np.ndarray, np.ndarray]:
    """(|s11| + s22, s12^2 + s21^2) for a batch of parameter rows; mirrors the
    scalar metrics on the closed-form state family."""
    n = params.shape[0]
    u = params[:, 0:16:4]
    v = params[:, 1:16:4]
    strength = u
    bias = v * (1.0 - u)
    rev = 0.5 * np.sqrt(np.maximum((1.0 + bias) ** 2 - strength**2, 0.0)) + 0.5 * np.sqrt(
        np.maximum((1.0 - bias) ** 2 - strength**2, 0.0)
    )
    dirs = _batch_directions(params[:, 2:16:4], params[:, 3:16:4])  # (n, 4, 3)

    if use_singlet:
        t_mat = np.broadcast_to(-np.eye(3), (n, 3, 3))
        a_vec = np.zeros((n, 3))
        b_vec = a_vec
    else:
        two_alpha = 2.0 * params[:, 16]
        t_mat = np.zeros((n, 3, 3))
        t_mat[:, 0, 0] = np.sin(two_alpha)
        t_mat[:, 1, 1] = -np.sin(two_alpha)
        t_mat[:, 2, 2] = 1.0
        a_vec = np.zeros((n, 3))
        a_vec[:, 2] = np.cos(two_alpha)
        b_vec = a_vec

    eye = np.eye(3)

    def averaged(i: int, j: int) -> np.ndarray:
        def channel(k: int) -> np.ndarray:
            outer = np.einsum("nj,nk->njk", dirs[:, k], dirs[:, k])
            return rev[:, k, None, None] * eye + (1.0 - rev[:, k])[:, None, None] * outer

        return 0.5 * (channel(i) + channel(j))

    k_map = averaged(0, 1)
    l_map = averaged(2, 3)

    def pair_expect(ia: int, ib: int) -> np.ndarray:
        return (
            bias[:, ia] * bias[:, ib]
            + bias[:, ia] * strength[:, ib] * np.einsum("nj,nj->n", b_vec, dirs[:, ib])
            + bias[:, ib] * strength[:, ia] * np.einsum("nj,nj->n", a_vec, dirs[:, ia])
            + strength[:, ia]
            * strength[:, ib]
            * np.einsum("nj,njk,nk->n", dirs[:, ia], t_mat, dirs[:, ib])
        )

    s11 = np.abs(pair_expect(0, 2) + pair_expect(0, 3) + pair_expect(1, 2) - pair_expect(1, 3))

    def cross(map_mat, corr, base, w_prim, w_sec, bias_prim, bias_sec):
        tw_plus = np.einsum("njk,nk->nj", corr, w_prim + w_sec)
        tw_minus = np.einsum("njk,nk->nj", corr, w_prim - w_sec)
        v_plus = (bias_prim + bias_sec)[:, None] * base + np.einsum("njk,nk->nj", map_mat, tw_plus)
        v_minus = (bias_prim - bias_sec)[:, None] * base + np.einsum("njk,nk->nj", map_mat, tw_minus)
        return np.linalg.norm(v_plus, axis=1) + np.linalg.norm(v_minus, axis=1)

    xt = strength[:, 0, None] * dirs[:, 0]
    xtp = strength[:, 1, None] * dirs[:, 1]
    yt = strength[:, 2, None] * dirs[:, 2]
    ytp = strength[:, 3, None] * dirs[:, 3]
    lb = np.einsum("njk,nk->nj", l_map, b_vec)
    ka = np.einsum("njk,nk->nj", k_map, a_vec)
    s12 = cross(l_map, np.swapaxes(t_mat, 1, 2), lb, xt, xtp, bias[:, 0], bias[:, 1])
    s21 = cross(k_map, t_mat, ka, yt, ytp, bias[:, 2], bias[:, 3])

    ktl = np.einsum("nij,njk,nkl->nil", k_map, t_mat, l_map)
    sv = np.linalg.svd(ktl, compute_uv=False)
    s22 = 2.0 * np.sqrt(sv[:, 0] ** 2 + sv[:, 1] ** 2)
    return s11 + s22, s12**2 + s21**2


def _mc_chunk(args) -> tuple[float, np.ndarray, float, np.ndarray]:
    seed, mode, chunk_index, count = args
    rng = _stream(seed, _TAG_MC, chunk_index)
    params = rng.uniform(PARAM_LOWER, PARAM_UPPER, size=(count, N_PARAMS))
    params = _restrict_mode(params, mode, chunk_index)
    sum_1122, sq_1221 = _batch_quantities(params, use_singlet=mode == "unbiased_singlet")
    i1 = int(np.argmax(sum_1122))
    i2 = int(np.argmax(sq_1221))
    return float(sum_1122[i1]), params[i1].copy(), float(sq_1221[i2]), params[i2].copy()


def monte_carlo_bounds(
    n: int, mode: str, seed: int, worker_count: int = 1
) -> MonteCarloSummary:
    """Stream n random scenarios under the mode's restrictions and track the
    extrema of the monogamy quantities.

    unbiased_singlet: unbiased observables on the singlet (the |s11| + s22
    conjecture); eq13_hypotheses: the proven hypothesis combinations of the
    cross-pair relation; free: no restriction, extrema recorded only.
    Deterministic per seed, independent of worker_count.
    """
    if mode not in ("unbiased_singlet", "eq13_hypotheses", "free"):
        raise ValueError(f"unknown mode {mode!r}")
    if n < 1:
        raise ValueError("n must be at least 1")
    chunk_args = []
    start = 0
    index = 0
    while start < n:
        chunk_args.append((seed, mode, index, min(_MC_CHUNK, n - start)))
        start += _MC_CHUNK
        index += 1
    if worker_count > 1:
        with ProcessPoolExecutor(max_workers=worker_count) as pool:
            parts = list(pool.map(_mc_chunk, chunk_args, chunksize=4))
    else:
        parts = [_mc_chunk(a) for a in chunk_args]

    max_sum, arg_sum, max_sq, arg_sq = parts[0]
    for cand_sum, cand_arg1, cand_sq, cand_arg2 in parts[1:]:
        if cand_sum > max_sum:
            max_sum, arg_sum = cand_sum, cand_arg1
        if cand_sq > max_sq:
            max_sq, arg_sq = cand_sq, cand_arg2
    arg_sum.flags.writeable = False
    arg_sq.flags.writeable = False
    return MonteCarloSummary(
        mode=mode,
        n=n,
        seed=seed,
        max_s11_plus_s22=max_sum,
        argmax_s11_plus_s22=arg_sum,
        max_s12sq_plus_s21sq=max_sq,
        argmax_s12sq_plus_s21sq=arg_sq,
        worst_eq14_residual=4.0 - max_sum,
        worst_eq13_residual=8.0 - max_sq,
    )
