"""Dual demixing semidefinite program: assembly, solving, validation.

The program maximizes Re<y, q> - eta*||q||_2 over q and two Hermitian Gram
blocks (one per role), subject to

    [[Q, c], [c^H, 1]] >= 0   with  c = C(r_max)^H A^H q,

and diagonal-sum constraints <Theta_n, Q> = 1_{n=0} that make the quadratic
form v(theta)^H Q v(theta) a normalized trigonometric moment sequence.  Two
readings of the diagonal constraints are supported:

* ``"one-level"``: Theta_n has ones along the n-th diagonal of the W x W
  vectorized index (literal elementary-Toeplitz constraints);
* ``"two-level"``: one constraint per (delta_l, delta_q) offset pair of the
  underlying order grid, which certifies the unit sup-norm bound of the dual
  polynomial at r_max pointwise.

The reference solver is a first-order splitting (ADMM) scheme: alternating a
closed-form projection onto the diagonal-sum affine set, a small strongly
convex q-update, and PSD projections of the bordered blocks by Hermitian
eigendecomposition.  A final polishing step rescales the iterate into an
exactly feasible point.  Any external conic solver meeting the same contract
(two complex-Hermitian PSD blocks, linear trace equalities, second-order-cone
objective term) can be plugged in; a cvxpy adapter is provided and problem
instances can be serialized for third-party benchmarking.
"""

import io
import json
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

__all__ = [
    "DualSolution",
    "FeasibilityReport",
    "SdpProblem",
    "SolverOptions",
    "AdmmDualSolver",
    "CvxpyDualSolver",
    "assemble_problem",
    "complex_to_real_embedding",
    "real_embedding_to_complex",
    "psd_project_hermitian",
    "dump_problem",
    "load_problem",
    "solve",
    "validate",
]

TOEPLITZ_MODES = ("one-level", "two-level")


# ---------------------------------------------------------------------------
# problem data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SdpProblem:
    """Fixed data of the dual program.

    ``cmax_*`` are the distance matrices evaluated at the top of each role's
    range, where the largest singular value of C(r) is expected to occur.
    """

    y: np.ndarray
    pilot_comm: np.ndarray
    pilot_radar: np.ndarray
    cmax_comm: np.ndarray
    cmax_radar: np.ndarray
    eta: float
    orders_comm: tuple  # (I1, I2) of the comm block
    orders_radar: tuple
    toeplitz: str = "one-level"

    def __post_init__(self):
        m = self.y.shape[0]
        nr = self.pilot_comm.shape[1]
        if self.pilot_comm.shape[0] != m or self.pilot_radar.shape != self.pilot_comm.shape:
            raise ValueError("pilot matrices must be m x N_r and match y")
        if self.cmax_comm.shape[0] != nr or self.cmax_radar.shape[0] != nr:
            raise ValueError("distance matrices must have N_r rows")
        for (i1, i2), c in (
            (self.orders_comm, self.cmax_comm),
            (self.orders_radar, self.cmax_radar),
        ):
            if (2 * i1 + 1) * (2 * i2 + 1) != c.shape[1]:
                raise ValueError("truncation orders inconsistent with block width")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.toeplitz not in TOEPLITZ_MODES:
            raise ValueError(f"toeplitz must be one of {TOEPLITZ_MODES}")

    @property
    def num_samples(self):
        return self.y.shape[0]

    @property
    def width_comm(self):
        return self.cmax_comm.shape[1]

    @property
    def width_radar(self):
        return self.cmax_radar.shape[1]

    def border_map(self, role):
        """K with c = K q for the requested role, shape (W, m)."""
        if role == "comm":
            return self.cmax_comm.conj().T @ self.pilot_comm.conj().T
        return self.cmax_radar.conj().T @ self.pilot_radar.conj().T


def assemble_problem(measurements, dict_comm, dict_radar, toeplitz="one-level"):
    """Build the dual program from measurements and per-role dictionaries."""
    if dict_comm.geom.num_antennas != measurements.num_antennas:
        raise ValueError("dictionary and measurements disagree on antenna count")
    if dict_radar.geom.num_antennas != measurements.num_antennas:
        raise ValueError("dictionary and measurements disagree on antenna count")
    return SdpProblem(
        y=np.asarray(measurements.y, dtype=complex),
        pilot_comm=np.asarray(measurements.pilot_comm, dtype=complex),
        pilot_radar=np.asarray(measurements.pilot_radar, dtype=complex),
        cmax_comm=dict_comm.distance_matrix(dict_comm.r_max),
        cmax_radar=dict_radar.distance_matrix(dict_radar.r_max),
        eta=float(measurements.noise_bound),
        orders_comm=(dict_comm.orders.i1, dict_comm.orders.i2),
        orders_radar=(dict_radar.orders.i1, dict_radar.orders.i2),
        toeplitz=toeplitz,
    )


# ---------------------------------------------------------------------------
# diagonal-sum (Toeplitz trace) machinery
# ---------------------------------------------------------------------------


def _diag_classes_one_level(width):
    idx = np.arange(width)
    cls = idx[None, :] - idx[:, None] + (width - 1)
    targets = np.zeros(2 * width - 1)
    targets[width - 1] = 1.0
    return cls.astype(np.int64), targets


def _diag_classes_two_level(i1, i2):
    i1p, i2p = 2 * i1 + 1, 2 * i2 + 1
    l_of = np.tile(np.arange(i1p), i2p)  # l index, fastest
    q_of = np.repeat(np.arange(i2p), i1p)
    dl = l_of[None, :] - l_of[:, None] + (i1p - 1)
    dq = q_of[None, :] - q_of[:, None] + (i2p - 1)
    n_dq = 2 * i2p - 1
    cls = dl * n_dq + dq
    targets = np.zeros((2 * i1p - 1) * n_dq)
    targets[(i1p - 1) * n_dq + (i2p - 1)] = 1.0
    return cls.astype(np.int64), targets


class _DiagonalConstraints:
    """Closed-form projection onto the diagonal-sum affine set."""

    def __init__(self, orders, width, mode):
        if mode == "one-level":
            cls, targets = _diag_classes_one_level(width)
        else:
            cls, targets = _diag_classes_two_level(*orders)
        self.flat_cls = cls.ravel()
        self.targets = targets
        self.counts = np.bincount(self.flat_cls, minlength=targets.size).astype(float)
        self.width = width

    def sums(self, q_mat):
        re = np.bincount(self.flat_cls, weights=q_mat.real.ravel(), minlength=self.targets.size)
        im = np.bincount(self.flat_cls, weights=q_mat.imag.ravel(), minlength=self.targets.size)
        return re + 1j * im

    def violation(self, q_mat):
        return float(np.max(np.abs(self.sums(q_mat) - self.targets)))

    def project(self, mat):
        """Nearest Hermitian matrix with exact diagonal-class sums."""
        q_mat = 0.5 * (mat + mat.conj().T)
        shift = (self.sums(q_mat) - self.targets) / self.counts
        out = q_mat - shift[self.flat_cls].reshape(q_mat.shape)
        return 0.5 * (out + out.conj().T)


# ---------------------------------------------------------------------------
# Hermitian/PSD helpers
# ---------------------------------------------------------------------------


def complex_to_real_embedding(mat):
    """[[Re, -Im], [Im, Re]] real-symmetric embedding of a Hermitian matrix.

    Doubles the dimension; eigenvalues appear twice.  Lets real-symmetric-only
    conic solvers consume the PSD blocks of this module.
    """
    re, im = mat.real, mat.imag
    return np.block([[re, -im], [im, re]])


def real_embedding_to_complex(mat):
    n = mat.shape[0] // 2
    re = 0.5 * (mat[:n, :n] + mat[n:, n:])
    im = 0.5 * (mat[n:, :n] - mat[:n, n:])
    return re + 1j * im


def psd_project_hermitian(mat):
    """Nearest (Frobenius) PSD matrix to a Hermitian matrix.

    Clips negative eigenvalues; commutes with the real-symmetric embedding, so
    projecting the embedded block gives the embedded projection.
    """
    vals, vecs = sla.eigh(mat, driver="evr")
    pos = vals > 0
    if pos.all():
        return mat, float(vals[0])
    if not pos.any():
        return np.zeros_like(mat), float(vals[0])
    vp = vecs[:, pos] * vals[pos]
    out = vp @ vecs[:, pos].conj().T
    return 0.5 * (out + out.conj().T), float(vals[0])


def _bordered(q_mat, border):
    w = q_mat.shape[0]
    out = np.empty((w + 1, w + 1), dtype=complex)
    out[:w, :w] = q_mat
    out[:w, w] = border
    out[w, :w] = border.conj()
    out[w, w] = 1.0
    return out


# ---------------------------------------------------------------------------
# solution containers
# ---------------------------------------------------------------------------


@dataclass
class SolverOptions:
    tol: float = 1e-6
    max_iters: int = 100_000
    rho: float = 1.0
    over_relaxation: float = 1.7
    check_every: int = 20
    adapt_rho: bool = True
    polish: bool = True
    verbose: bool = False


@dataclass
class SolverDiagnostics:
    iterations: int = 0
    primal_residual: float = np.inf
    dual_residual: float = np.inf
    rho: float = 0.0
    runtime: float = 0.0
    polish_scale: float = 1.0
    polish_eps: tuple = (0.0, 0.0)
    backend: str = "admm"
    message: str = ""


@dataclass
class DualSolution:
    q: np.ndarray
    q_gram_comm: np.ndarray
    q_gram_radar: np.ndarray
    objective: float
    converged: bool
    diagnostics: SolverDiagnostics = field(default_factory=SolverDiagnostics)


def _objective(problem, q):
    return float(np.real(np.vdot(problem.y, q)) - problem.eta * np.linalg.norm(q))


# ---------------------------------------------------------------------------
# reference first-order solver
# ---------------------------------------------------------------------------


class AdmmDualSolver:
    """Reference splitting solver for :class:`SdpProblem`.

    Deterministic for fixed inputs and options.  One instance owns its iterate
    state; run separate instances for concurrent solves.
    """

    def __init__(self, opts=None):
        self.opts = opts or SolverOptions()

    def solve(self, problem):
        opts = self.opts
        t_start = time.perf_counter()
        m = problem.num_samples
        y = problem.y
        eta = problem.eta

        if np.linalg.norm(y) == 0.0:
            # Degenerate data: q = 0 with any feasible Gram pair is optimal.
            diag = SolverDiagnostics(iterations=0, primal_residual=0.0, dual_residual=0.0,
                                     rho=opts.rho, runtime=0.0, message="zero data")
            return DualSolution(
                q=np.zeros(m, dtype=complex),
                q_gram_comm=np.eye(problem.width_comm, dtype=complex) / problem.width_comm,
                q_gram_radar=np.eye(problem.width_radar, dtype=complex) / problem.width_radar,
                objective=0.0, converged=True, diagnostics=diag)

        blocks = []
        for role, orders, width in (
            ("comm", problem.orders_comm, problem.width_comm),
            ("radar", problem.orders_radar, problem.width_radar),
        ):
            k_map = problem.border_map(role)
            blocks.append({
                "K": k_map,
                "diag": _DiagonalConstraints(orders, width, problem.toeplitz),
                "W": width,
                "Q": np.eye(width, dtype=complex) / width,
                "Z": None,
                "U": np.zeros((width + 1, width + 1), dtype=complex),
            })
        for blk in blocks:
            blk["Z"] = _bordered(blk["Q"], np.zeros(blk["W"], dtype=complex))

        gram = sum(blk["K"].conj().T @ blk["K"] for blk in blocks)
        gvals, gvecs = np.linalg.eigh(0.5 * (gram + gram.conj().T))
        gvals = np.clip(gvals, 0.0, None)

        rho = float(opts.rho)
        alpha = float(opts.over_relaxation)
        q = np.zeros(m, dtype=complex)
        primal, dual = np.inf, np.inf
        n_iter = 0
        scale_y = max(1.0, float(np.linalg.norm(y)))

        def solve_q(rhs):
            # minimize -Re<y,q> + eta||q|| + rho*sum ||K q - w||^2
            btil = gvecs.conj().T @ rhs
            denom0 = 2.0 * rho * gvals
            if eta == 0.0:
                inv = np.where(denom0 > 1e-14 * max(denom0.max(), 1.0), 1.0 / np.where(denom0 > 0, denom0, 1.0), 0.0)
                return gvecs @ (inv * btil)
            if np.linalg.norm(rhs) <= eta:
                return np.zeros(m, dtype=complex)
            b2 = np.abs(btil) ** 2

            def fun(s):
                return s * s * np.sum(b2 / (denom0 + s) ** 2) - eta * eta

            s_hi = float(np.linalg.norm(rhs))
            while fun(s_hi) < 0:
                s_hi *= 2.0
            s_root = brentq(fun, 0.0, s_hi, xtol=1e-15, rtol=1e-14)
            return gvecs @ (btil / (denom0 + s_root))

        for n_iter in range(1, opts.max_iters + 1):
            rhs = y.copy()
            for blk in blocks:
                t_mat = blk["Z"] - blk["U"]
                blk["Q"] = blk["diag"].project(t_mat[: blk["W"], : blk["W"]])
                blk["w"] = 0.5 * (t_mat[: blk["W"], blk["W"]] + t_mat[blk["W"], : blk["W"]].conj())
                rhs += 2.0 * rho * (blk["K"].conj().T @ blk["w"])
            q = solve_q(rhs)

            prim_sq = 0.0
            dual_sq = 0.0
            for blk in blocks:
                border = blk["K"] @ q
                m_blk = _bordered(blk["Q"], border)
                relaxed = alpha * m_blk + (1.0 - alpha) * blk["Z"]
                z_new, _ = psd_project_hermitian(relaxed + blk["U"])
                blk["U"] += relaxed - z_new
                dual_sq += float(np.linalg.norm(z_new - blk["Z"]) ** 2)
                blk["Z"] = z_new
                prim_sq += float(np.linalg.norm(m_blk - z_new) ** 2)

            if n_iter % opts.check_every == 0 or n_iter == opts.max_iters:
                primal = np.sqrt(prim_sq)
                dual = rho * np.sqrt(dual_sq)
                if opts.verbose:
                    print(f"iter {n_iter:6d} rho {rho:8.2e} primal {primal:9.3e} "
                          f"dual {dual:9.3e} obj {_objective(problem, q):.8f}")
                tol_scale = scale_y + sum(float(np.linalg.norm(b["Z"])) for b in blocks)
                if primal <= opts.tol * tol_scale and dual <= opts.tol * tol_scale:
                    break
                if opts.adapt_rho and n_iter % (5 * opts.check_every) == 0:
                    if primal > 10.0 * dual and rho < 1e4:
                        rho *= 2.0
                        for blk in blocks:
                            blk["U"] *= 0.5
                    elif dual > 10.0 * primal and rho > 1e-4:
                        rho *= 0.5
                        for blk in blocks:
                            blk["U"] *= 2.0

        converged = primal < np.inf and (
            primal <= opts.tol * (scale_y + sum(float(np.linalg.norm(b["Z"])) for b in blocks))
        )
        polish_scale = 1.0
        eps_blocks = [0.0, 0.0]
        if opts.polish:
            q, eps_blocks, polish_scale = _polish(problem, q, blocks)

        diag = SolverDiagnostics(
            iterations=n_iter, primal_residual=float(primal), dual_residual=float(dual),
            rho=rho, runtime=time.perf_counter() - t_start, polish_scale=polish_scale,
            polish_eps=tuple(eps_blocks), backend="admm",
            message="converged" if converged else "max_iters reached")
        q_comm = 0.5 * (blocks[0]["Q"] + blocks[0]["Q"].conj().T)
        q_radar = 0.5 * (blocks[1]["Q"] + blocks[1]["Q"].conj().T)
        return DualSolution(q=q, q_gram_comm=q_comm, q_gram_radar=q_radar,
                            objective=_objective(problem, q), converged=bool(converged),
                            diagnostics=diag)


def _polish(problem, q, blocks):
    """Rescale the iterate into an exactly feasible point.

    With per-block PSD violation eps (bordered block >= -eps*I) and exact
    diagonal sums, Q' = (Q + eps*I)/(1 + eps*W) keeps the sums and satisfies
    Q' >= (t*c)(t*c)^H for t = 1/sqrt((1+eps)(1+eps*W)), so shrinking q by the
    worst-case t restores feasibility at a negligible objective cost.
    """
    eps_blocks = []
    t_factors = []
    for blk in blocks:
        m_blk = _bordered(blk["Q"], blk["K"] @ q)
        lam_min = float(sla.eigh(m_blk, eigvals_only=True, subset_by_index=[0, 0],
                                 driver="evr")[0])
        eps = max(0.0, -lam_min) + 1e-12 * (1.0 + float(np.linalg.norm(m_blk)))
        eps_blocks.append(eps)
        w = blk["W"]
        blk["Q"] = (blk["Q"] + eps * np.eye(w)) / (1.0 + eps * w)
        t_factors.append(1.0 / np.sqrt((1.0 + eps) * (1.0 + eps * w)))
    t_min = min(t_factors)
    return q * t_min, eps_blocks, t_min


# ---------------------------------------------------------------------------
# optional cvxpy adapter (external conic-solver contract)
# ---------------------------------------------------------------------------


class CvxpyDualSolver:
    """Adapter exercising the pluggable-solver contract through cvxpy.

    Intended for small instances and cross-validation; requires the optional
    ``cvxpy`` dependency.
    """

    def __init__(self, solver=None, **solve_kwargs):
        self.solver = solver
        self.solve_kwargs = solve_kwargs

    def solve(self, problem):
        import cvxpy as cp

        t_start = time.perf_counter()
        m = problem.num_samples
        q = cp.Variable(m, complex=True)
        grams = {}
        constraints = []
        for role, orders, width in (
            ("comm", problem.orders_comm, problem.width_comm),
            ("radar", problem.orders_radar, problem.width_radar),
        ):
            q_blk = cp.Variable((width, width), hermitian=True)
            grams[role] = q_blk
            border = problem.border_map(role) @ q
            block = cp.bmat([
                [q_blk, cp.reshape(border, (width, 1), order="F")],
                [cp.reshape(cp.conj(border), (1, width), order="F"),
                 np.ones((1, 1))],
            ])
            constraints.append(block >> 0)
            diag = _DiagonalConstraints(orders, width, problem.toeplitz)
            for k in range(diag.targets.size):
                mask = (diag.flat_cls == k).reshape(width, width)
                constraints.append(cp.sum(cp.multiply(mask, q_blk)) == diag.targets[k])
        objective = cp.Maximize(cp.real(problem.y.conj() @ q) - problem.eta * cp.norm(q, 2))
        prob = cp.Problem(objective, constraints)
        prob.solve(solver=self.solver, **self.solve_kwargs)
        if q.value is None:
            raise RuntimeError(f"cvxpy solve failed with status {prob.status}")
        diag = SolverDiagnostics(iterations=-1, primal_residual=np.nan, dual_residual=np.nan,
                                 rho=np.nan, runtime=time.perf_counter() - t_start,
                                 backend=f"cvxpy:{prob.solver_stats.solver_name}",
                                 message=prob.status)
        qc = 0.5 * (grams["comm"].value + grams["comm"].value.conj().T)
        qr = 0.5 * (grams["radar"].value + grams["radar"].value.conj().T)
        return DualSolution(q=q.value, q_gram_comm=qc, q_gram_radar=qr,
                            objective=_objective(problem, q.value),
                            converged=prob.status in ("optimal", "optimal_inaccurate"),
                            diagnostics=diag)


def solve(problem, opts=None, solver=None):
    """Solve the dual program with the reference splitting solver.

    Pass ``solver`` to substitute any object with a ``solve(problem)`` method
    returning a :class:`DualSolution` (see :class:`CvxpyDualSolver`).
    """
    if solver is None:
        solver = AdmmDualSolver(opts or SolverOptions())
    return solver.solve(problem)


# ---------------------------------------------------------------------------
# feasibility validation
# ---------------------------------------------------------------------------


@dataclass
class FeasibilityReport:
    lambda_min_comm: float
    lambda_min_radar: float
    diag_violation_comm: float
    diag_violation_radar: float
    objective: float
    tau: float
    passed: bool

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"feasibility {status}: lambda_min=({self.lambda_min_comm:.3e}, "
                f"{self.lambda_min_radar:.3e}), diag violation=({self.diag_violation_comm:.3e}, "
                f"{self.diag_violation_radar:.3e}), objective={self.objective:.8f}")


def validate(solution, problem, tau=1e-6):
    """Recompute bordered-block eigenvalues and diagonal-sum violations.

    Pass criteria, scaled by block norms: smallest eigenvalue of each bordered
    block >= -tau*(1+||block||_F) and every diagonal-sum violation
    <= tau*(1+||Q||_F).
    """
    stats = {}
    ok = True
    for role, q_gram, orders in (
        ("comm", solution.q_gram_comm, problem.orders_comm),
        ("radar", solution.q_gram_radar, problem.orders_radar),
    ):
        width = q_gram.shape[0]
        border = problem.border_map(role) @ solution.q
        block = _bordered(q_gram, border)
        lam_min = float(sla.eigh(block, eigvals_only=True, subset_by_index=[0, 0],
                                 driver="evr")[0])
        diag = _DiagonalConstraints(orders, width, problem.toeplitz)
        viol = diag.violation(q_gram)
        ok &= lam_min >= -tau * (1.0 + float(np.linalg.norm(block)))
        ok &= viol <= tau * (1.0 + float(np.linalg.norm(q_gram)))
        stats[role] = (lam_min, viol)
    return FeasibilityReport(
        lambda_min_comm=stats["comm"][0], lambda_min_radar=stats["radar"][0],
        diag_violation_comm=stats["comm"][1], diag_violation_radar=stats["radar"][1],
        objective=_objective(problem, solution.q), tau=tau, passed=bool(ok))


# ---------------------------------------------------------------------------
# problem serialization (for third-party solver benchmarking)
# ---------------------------------------------------------------------------

_MAGIC = b"NLSDP1\n"


def dump_problem(problem, path_or_file):
    """Write a problem instance: magic, JSON header line, raw complex arrays.

    Arrays follow the header in the order y, pilot_comm, pilot_radar,
    cmax_comm, cmax_radar as row-major little-endian complex128.
    """
    header = {
        "m": problem.num_samples,
        "num_antennas": problem.pilot_comm.shape[1],
        "width_comm": problem.width_comm,
        "width_radar": problem.width_radar,
        "eta": problem.eta,
        "orders_comm": list(problem.orders_comm),
        "orders_radar": list(problem.orders_radar),
        "toeplitz": problem.toeplitz,
        "dtype": "complex128",
    }

    def write(f):
        f.write(_MAGIC)
        f.write((json.dumps(header, sort_keys=True) + "\n").encode())
        for arr in (problem.y, problem.pilot_comm, problem.pilot_radar,
                    problem.cmax_comm, problem.cmax_radar):
            f.write(np.ascontiguousarray(arr, dtype="<c16").tobytes())

    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "wb") as f:
            write(f)
    else:
        write(path_or_file)


def load_problem(path_or_file):
    """Inverse of :func:`dump_problem`."""

    def read(f):
        if f.read(len(_MAGIC)) != _MAGIC:
            raise ValueError("not a serialized problem file")
        header = json.loads(f.readline().decode())
        m = header["m"]
        nr = header["num_antennas"]
        wc, wr = header["width_comm"], header["width_radar"]

        def arr(shape):
            n = int(np.prod(shape))
            buf = f.read(n * 16)
            return np.frombuffer(buf, dtype="<c16").astype(complex).reshape(shape)

        return SdpProblem(
            y=arr((m,)), pilot_comm=arr((m, nr)), pilot_radar=arr((m, nr)),
            cmax_comm=arr((nr, wc)), cmax_radar=arr((nr, wr)), eta=header["eta"],
            orders_comm=tuple(header["orders_comm"]),
            orders_radar=tuple(header["orders_radar"]), toeplitz=header["toeplitz"])

    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "rb") as f:
            return read(f)
    return read(path_or_file)
