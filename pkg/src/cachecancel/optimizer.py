"""Optimal distributed caching via linear programming.

In the interference-limited, unlimited-cancellation-range regime the
average loss rate of a caching distribution ``p`` over size-``m`` subsets
is linear in ``p``: a subset covering access mass ``F`` contributes

    cost(F) = (1 - F) * (1 - F) * Z1 / (1 + (1 - F) * Z1),

the probability that a request misses the cache times the loss rate at
cancellable fraction ``F``.  Minimizing the average subject to every packet
being cached by the same fraction ``m / n`` of base stations (which is what
makes the cancellable fraction of subset ``i`` equal its own covered mass)
is the LP solved here:

    minimize    sum_i p_i cost(F_i)
    subject to  sum_i p_i = 1
                sum_{i : j in subset_i} p_i = m / n   for every packet j
                p >= 0.

One packet-coverage row is redundant (the rows sum to ``m`` times the
density row) and is dropped; a basic solution therefore supports at most
``n`` subsets.  The solver is a two-phase revised simplex.  Entering
columns are priced by most negative reduced cost; because the constraints
are heavily degenerate (every coverage row shares the value ``m / n``),
the solver watches for zero-step stalls and switches permanently to
Bland's smallest-index rule when it detects one, which guarantees
termination.  Small instances enumerate all ``C(n, m)`` columns; beyond
``DEFAULT_SUBSET_CAP`` columns are priced in lexicographic chunks without
materializing the full column set.
"""

import itertools
import json
import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .exceptions import NumericalError, SubsetCapError
from .model import CachingScheme
from .specfun import LaplaceExponent, z1

__all__ = [
    "DEFAULT_SUBSET_CAP",
    "LpProblem",
    "OptimizationResult",
    "enumerate_subsets",
    "build_lp",
    "solve_lp",
    "canonicalize",
    "optimize_distributed_caching",
    "result_to_json",
    "result_from_json",
]

DEFAULT_SUBSET_CAP = 200_000

_RC_TOL = 1e-10          # reduced cost considered negative below -_RC_TOL
_PIVOT_TOL = 1e-9        # minimum usable pivot magnitude
_RATIO_TIE_TOL = 1e-12   # ratio-test ties within this are broken by index
_FEAS_TOL = 1e-8         # phase-1 objective above this means infeasible
_RESIDUAL_TOL = 1e-9     # constraint residual bound on the reported scheme
_CHUNK = 65_536
_STALL_LIMIT = 1000      # zero-step pivots tolerated before Bland fallback


def enumerate_subsets(n, m, cap=DEFAULT_SUBSET_CAP):
    """All size-``m`` subsets of ``range(n)`` in lexicographic order.

    Returns an int64 array of shape ``(C(n, m), m)``.

    Raises
    ------
    SubsetCapError
        If ``C(n, m)`` exceeds `cap`; use
        :func:`optimize_distributed_caching`, which prices columns without
        materializing them, for such instances.
    """
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    count = comb(n, m)
    if count > cap:
        raise SubsetCapError(
            f"C({n}, {m}) = {count} subsets exceeds the cap of {cap}")
    out = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), m)),
        dtype=np.int64, count=count * m)
    return out.reshape(count, m)


def _cost_from_mass(covered_mass, zv):
    miss = 1.0 - covered_mass
    wz = miss * zv
    return miss * wz / (1.0 + wz)


def _exact_costs(f, subsets, zv):
    """Per-subset costs with compensated summation of the covered mass."""
    costs = np.empty(subsets.shape[0], dtype=np.float64)
    flist = f.tolist()
    for i, row in enumerate(subsets.tolist()):
        costs[i] = _cost_from_mass(math.fsum(flist[j] for j in row), zv)
    return costs


@dataclass(frozen=True, eq=False)
class LpProblem:
    """The explicit LP over an enumerated subset list.

    ``costs[i]`` is the objective coefficient of ``subsets[i]``;
    ``coverage`` is the per-packet caching fraction ``m / n``.
    """

    n: int
    m: int
    subsets: np.ndarray
    costs: np.ndarray
    coverage: float

    def __post_init__(self):
        if self.subsets.ndim != 2 or self.subsets.shape[1] != self.m:
            raise ValueError("subsets must have shape (count, m)")
        if self.costs.shape != (self.subsets.shape[0],):
            raise ValueError("costs must have one entry per subset")


def build_lp(library, subsets, t_bar, beta):
    """Assemble the caching LP for an explicit subset list."""
    subsets = np.ascontiguousarray(subsets, dtype=np.int64)
    m = subsets.shape[1] if subsets.ndim == 2 else 0
    zv = z1(LaplaceExponent(beta=beta, t_bar=t_bar))
    costs = _exact_costs(library.probabilities, subsets, zv)
    return LpProblem(n=library.n, m=m, subsets=subsets, costs=costs,
                     coverage=m / library.n)


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    """Outcome of the caching LP.

    ``status`` is one of ``optimal``, ``infeasible`` or
    ``numerical_failure`` (the last also covers hitting the iteration
    cap); ``scheme`` is None unless optimal.
    ``max_constraint_residual`` is the largest violation of the density and
    coverage equalities by the reported scheme.
    """

    status: str
    scheme: CachingScheme
    objective: float
    support_size: int
    iterations: int
    max_constraint_residual: float


class _DenseOracle:
    """Column oracle over an enumerated LpProblem."""

    def __init__(self, problem):
        self.subsets = problem.subsets
        self.costs = problem.costs
        self.n = problem.n
        self.count = problem.subsets.shape[0]

    def column(self, j, rows):
        col = np.zeros(rows, dtype=np.float64)
        col[0] = 1.0
        inner = self.subsets[j][self.subsets[j] < self.n - 1]
        col[1 + inner] = 1.0
        return col

    def cost(self, j):
        return float(self.costs[j])

    def subset(self, j):
        return tuple(self.subsets[j].tolist())

    def _dot_all(self, y):
        """y . a_j for every column j, vectorized over the subset list."""
        y_ext = np.append(y[1:], 0.0)
        covered = (y_ext[self.subsets].sum(axis=1)
                   if self.subsets.shape[1] else
                   np.zeros(self.count))
        return y[0] + covered

    def price(self, y, use_costs, in_basis, rule):
        rc = -self._dot_all(y)
        if use_costs:
            rc = rc + self.costs
        cand = np.flatnonzero(rc < -_RC_TOL)
        if rule == "dantzig":
            # Stable sort keeps ties index-ascending, so pricing stays
            # deterministic.
            cand = cand[np.argsort(rc[cand], kind="stable")]
        for j in cand:
            if int(j) not in in_basis:
                return int(j)
        return None

    def first_nonorthogonal(self, u, in_basis):
        coeff = self._dot_all(u)
        for j in np.flatnonzero(np.abs(coeff) > _PIVOT_TOL):
            if int(j) not in in_basis:
                return int(j)
        return None


class _StreamingOracle:
    """Column oracle that prices lexicographic chunks of C(n, m) columns.

    Covered masses use vectorized summation here; at most ``m`` terms per
    subset, so the rounding slack is ~``m`` ulp, far below the solver
    tolerances.
    """

    def __init__(self, f, n, m, zv):
        self.f = np.asarray(f, dtype=np.float64)
        self.n = n
        self.m = m
        self.zv = zv
        self.count = comb(n, m)
        self._cache = {}

    def _materialize(self, j):
        if j not in self._cache:
            subset = next(itertools.islice(
                itertools.combinations(range(self.n), self.m), j, None))
            self._cache[j] = subset
        return self._cache[j]

    def column(self, j, rows):
        subset = np.array(self._materialize(j), dtype=np.int64)
        col = np.zeros(rows, dtype=np.float64)
        col[0] = 1.0
        col[1 + subset[subset < self.n - 1]] = 1.0
        return col

    def cost(self, j):
        subset = self._materialize(j)
        return _cost_from_mass(math.fsum(self.f[k] for k in subset), self.zv)

    def subset(self, j):
        return tuple(self._materialize(j))

    def _scan(self, select):
        """First column index accepted by ``select(values, chunk)``, where
        ``values`` are per-chunk y . a_j dot products."""
        combos = itertools.combinations(range(self.n), self.m)
        offset = 0
        while True:
            chunk = list(itertools.islice(combos, _CHUNK))
            if not chunk:
                return None
            arr = np.array(chunk, dtype=np.int64)
            if arr.ndim == 1:
                arr = arr.reshape(len(chunk), 0)
            hit = select(arr, chunk, offset)
            if hit is not None:
                return hit
            offset += len(chunk)

    def _dot_chunk(self, y, arr):
        y_ext = np.append(y[1:], 0.0)
        covered = y_ext[arr].sum(axis=1) if self.m else \
            np.zeros(arr.shape[0])
        return y[0] + covered

    def _chunk_rc(self, y, use_costs, arr):
        rc = -self._dot_chunk(y, arr)
        if use_costs:
            covered = self.f[arr].sum(axis=1) if self.m else \
                np.zeros(arr.shape[0])
            rc = rc + _cost_from_mass(covered, self.zv)
        return rc

    def price(self, y, use_costs, in_basis, rule):
        if rule == "bland":
            def select(arr, chunk, offset):
                rc = self._chunk_rc(y, use_costs, arr)
                for h in np.flatnonzero(rc < -_RC_TOL):
                    j = offset + int(h)
                    if j not in in_basis:
                        self._cache[j] = chunk[int(h)]
                        return j
                return None

            return self._scan(select)

        # Most negative reduced cost over a full pass; strict comparison
        # keeps the earliest index on exact ties.
        best_j = None
        best_rc = -_RC_TOL
        best_subset = None
        combos = itertools.combinations(range(self.n), self.m)
        offset = 0
        while True:
            chunk = list(itertools.islice(combos, _CHUNK))
            if not chunk:
                break
            arr = np.array(chunk, dtype=np.int64)
            if arr.ndim == 1:
                arr = arr.reshape(len(chunk), 0)
            rc = self._chunk_rc(y, use_costs, arr)
            cand = np.flatnonzero(rc < best_rc)
            for h in cand[np.argsort(rc[cand], kind="stable")]:
                j = offset + int(h)
                if j not in in_basis:
                    best_j = j
                    best_rc = float(rc[h])
                    best_subset = chunk[int(h)]
                    break
            offset += len(chunk)
        if best_j is not None:
            self._cache[best_j] = best_subset
        return best_j

    def first_nonorthogonal(self, u, in_basis):
        def select(arr, chunk, offset):
            coeff = self._dot_chunk(u, arr)
            for h in np.flatnonzero(np.abs(coeff) > _PIVOT_TOL):
                j = offset + int(h)
                if j not in in_basis:
                    self._cache[j] = chunk[int(h)]
                    return j
            return None

        return self._scan(select)


def _revised_simplex(oracle, n, m, max_iterations):
    """Two-phase revised simplex.

    Pricing uses the most negative reduced cost.  The right-hand side is
    heavily degenerate (all coverage rows equal m / n), so after
    _STALL_LIMIT consecutive zero-length steps the entering rule drops to
    Bland's smallest-index rule, which provably escapes any cycle; a
    strictly improving step switches back.  Returns (status, x_dict,
    iterations) where x_dict maps column index to basic value.
    """
    rows = n  # density row + (n - 1) independent coverage rows
    b = np.full(rows, m / n, dtype=np.float64)
    b[0] = 1.0

    # basis entries: ("art", row) or ("real", j); artificials never re-enter.
    basis = [("art", r) for r in range(rows)]
    basis_cols = np.eye(rows, dtype=np.float64)
    iterations = 0

    def solve_basic():
        return np.linalg.solve(basis_cols, b)

    def basic_real_set():
        return {entry[1] for entry in basis if entry[0] == "real"}

    def bland_order(entry):
        # Real variables order before artificials; both by index.
        return (0, entry[1]) if entry[0] == "real" else (1, entry[1])

    def pivot(row, j):
        basis[row] = ("real", j)
        basis_cols[:, row] = oracle.column(j, rows)

    def iterate(phase):
        nonlocal iterations
        rule = "dantzig"
        stall = 0
        while True:
            if iterations >= max_iterations:
                return "numerical_failure"
            if phase == 1:
                c_b = np.array([1.0 if kind == "art" else 0.0
                                for kind, _ in basis])
            else:
                c_b = np.array([0.0 if kind == "art" else oracle.cost(idx)
                                for kind, idx in basis])
            y = np.linalg.solve(basis_cols.T, c_b)
            j = oracle.price(y, use_costs=(phase == 2),
                             in_basis=basic_real_set(), rule=rule)
            if j is None:
                return "optimal"
            iterations += 1
            col = oracle.column(j, rows)
            direction = np.linalg.solve(basis_cols, col)
            x_b = solve_basic()
            usable = direction > _PIVOT_TOL
            if not usable.any():
                return "numerical_failure"  # bounded polytope: cannot occur
            ratios = np.where(usable, x_b / np.where(usable, direction, 1.0),
                              np.inf)
            best = ratios[usable].min()
            tied = np.flatnonzero(usable & (ratios <= best + _RATIO_TIE_TOL))
            row = min(tied, key=lambda r: bland_order(basis[r]))
            pivot(int(row), j)
            if best > _RATIO_TIE_TOL:
                stall = 0
                rule = "dantzig"
            elif rule == "dantzig":
                stall += 1
                if stall >= _STALL_LIMIT:
                    rule = "bland"

    status = iterate(phase=1)
    if status != "optimal":
        return status, {}, iterations
    x_b = solve_basic()
    phase1_obj = sum(v for (kind, _), v in zip(basis, x_b) if kind == "art")
    if phase1_obj > _FEAS_TOL:
        return "infeasible", {}, iterations

    # Drive zero-level artificials out of the basis where possible.
    for row in range(rows):
        if basis[row][0] != "art":
            continue
        e_row = np.zeros(rows)
        e_row[row] = 1.0
        u = np.linalg.solve(basis_cols.T, e_row)
        replacement = oracle.first_nonorthogonal(u, basic_real_set())
        if replacement is not None:
            pivot(row, replacement)
    # Any artificial still basic sits on a redundant row at level ~0; it
    # stays barred and harmless.

    status = iterate(phase=2)
    if status != "optimal":
        return status, {}, iterations
    x_b = solve_basic()
    solution = {}
    for (kind, idx), value in zip(basis, x_b):
        if kind == "real":
            solution[idx] = max(float(value), 0.0)
    return "optimal", solution, iterations


def _assemble_result(oracle, n, m, status, solution, iterations):
    if status != "optimal":
        return OptimizationResult(status=status, scheme=None,
                                  objective=math.nan, support_size=0,
                                  iterations=iterations,
                                  max_constraint_residual=math.nan)
    support = sorted(j for j, v in solution.items() if v > 1e-12)
    densities = np.array([solution[j] for j in support], dtype=np.float64)
    total = float(densities.sum())
    if abs(total - 1.0) > 1e-9:
        return OptimizationResult(status="numerical_failure", scheme=None,
                                  objective=math.nan, support_size=0,
                                  iterations=iterations,
                                  max_constraint_residual=abs(total - 1.0))
    densities = densities / total
    subsets = [oracle.subset(j) for j in support]
    scheme = CachingScheme.from_subsets(n, m, subsets, densities)
    objective = math.fsum(
        oracle.cost(j) * float(p) for j, p in zip(support, densities))
    coverage = scheme.densities @ scheme.cache_matrix.astype(np.float64)
    residual = float(np.abs(coverage - m / n).max()) if n else 0.0
    residual = max(residual,
                   abs(math.fsum(scheme.densities.tolist()) - 1.0))
    if residual > _RESIDUAL_TOL:
        return OptimizationResult(status="numerical_failure", scheme=scheme,
                                  objective=objective,
                                  support_size=len(support),
                                  iterations=iterations,
                                  max_constraint_residual=residual)
    return OptimizationResult(status="optimal", scheme=scheme,
                              objective=objective,
                              support_size=len(support),
                              iterations=iterations,
                              max_constraint_residual=residual)


def solve_lp(problem, max_iterations=50_000):
    """Solve an enumerated caching LP to an optimal basic solution.

    The returned scheme's support has at most ``n`` subsets (one per basis
    row) and satisfies the density and coverage constraints within 1e-9.
    """
    oracle = _DenseOracle(problem)
    status, solution, iterations = _revised_simplex(
        oracle, problem.n, problem.m, max_iterations)
    return _assemble_result(oracle, problem.n, problem.m, status, solution,
                            iterations)


def canonicalize(result):
    """Normalize an optimal result's scheme to canonical row order.

    Idempotent; recomputes the support size and constraint residuals from
    the stored scheme (the objective carries over unchanged).
    """
    if result.scheme is None:
        return result
    scheme = result.scheme
    rebuilt = CachingScheme(n=scheme.n, m=scheme.m,
                            densities=scheme.densities,
                            cache_matrix=scheme.cache_matrix)
    coverage = rebuilt.densities @ rebuilt.cache_matrix.astype(np.float64)
    residual = float(np.abs(coverage - scheme.m / scheme.n).max())
    residual = max(residual,
                   abs(math.fsum(rebuilt.densities.tolist()) - 1.0))
    return OptimizationResult(
        status=result.status, scheme=rebuilt, objective=result.objective,
        support_size=rebuilt.densities.shape[0],
        iterations=result.iterations, max_constraint_residual=residual)


def optimize_distributed_caching(library, m, t_bar, beta,
                                 subset_cap=DEFAULT_SUBSET_CAP,
                                 max_iterations=50_000):
    """Find the caching distribution minimizing the average loss rate.

    Enumerates all ``C(n, m)`` subsets when that fits under `subset_cap`;
    otherwise runs the same simplex with streaming column pricing.  The
    result is canonicalized.
    """
    n = library.n
    if not 0 <= m <= n:
        raise ValueError("need 0 <= m <= n")
    zv = z1(LaplaceExponent(beta=beta, t_bar=t_bar))
    if comb(n, m) <= subset_cap:
        problem = build_lp(library, enumerate_subsets(n, m, subset_cap),
                           t_bar, beta)
        result = solve_lp(problem, max_iterations=max_iterations)
    else:
        oracle = _StreamingOracle(library.probabilities, n, m, zv)
        status, solution, iterations = _revised_simplex(
            oracle, n, m, max_iterations)
        result = _assemble_result(oracle, n, m, status, solution, iterations)
    return canonicalize(result)


def result_to_json(result):
    """Serialize an OptimizationResult to a JSON string."""
    payload = {
        "status": result.status,
        "objective": result.objective,
        "support_size": result.support_size,
        "iterations": result.iterations,
        "max_constraint_residual": result.max_constraint_residual,
        "scheme": None,
    }
    if result.scheme is not None:
        payload["scheme"] = {
            "n": result.scheme.n,
            "m": result.scheme.m,
            "densities": result.scheme.densities.tolist(),
            "subsets": [list(s) for s in result.scheme.subsets()],
        }
    return json.dumps(payload, indent=2, sort_keys=True)


def result_from_json(text):
    """Rebuild an OptimizationResult from :func:`result_to_json` output."""
    payload = json.loads(text)
    scheme = None
    if payload["scheme"] is not None:
        blob = payload["scheme"]
        scheme = CachingScheme.from_subsets(
            blob["n"], blob["m"], [tuple(s) for s in blob["subsets"]],
            blob["densities"])
    return OptimizationResult(
        status=payload["status"], scheme=scheme,
        objective=payload["objective"],
        support_size=payload["support_size"],
        iterations=payload["iterations"],
        max_constraint_residual=payload["max_constraint_residual"])
