"""Mesh construction, local linearizations and the near-minima point process.

At each mesh point x_a the polynomial is replaced by its linearization
F_a(x) = P(x_a) + (x - x_a) P'(x_a), whose modulus is minimized at
x_a + Y_a with value |Z_a|/n, where

    Y_a = -Re(P conj(P')) / |P'|^2,     Z_a = n Im(P conj(P')) / |P'|.

A site is flagged as a representative near-local-minimizer when the
recentering stays inside the site's interval and the linearized minimum is
low (event A'), and P is regular there (event A'').  Flagged Z values form
the near-minima point process; thinning by bad arcs gives the sharp process.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .polymodel import PolySample, PreconditionError, evaluate, evaluate_mesh

__all__ = [
    "MeshConfig",
    "SiteRecord",
    "MinimaProcess",
    "GlobalMin",
    "build_mesh",
    "linearize_site",
    "select_minima",
    "global_min",
    "check_derivative_event",
    "check_separation",
    "process_to_csv",
]


@dataclass(frozen=True)
class MeshConfig:
    """Mesh resolution bookkeeping.

    ``N_paper`` is the asymptotic prescription floor(n^2 / (ln n)^K0); below
    n ~ 1e6 this is coarser than the degree, so the working resolution is
    ``N_effective = max(N_paper, beta * n, 2n+1)`` with oversampling floor
    ``beta``.
    """

    n: int
    K0: float = 5.0
    C0: float = 2.0
    beta: int = 64
    N_paper: int = field(init=False, default=0)
    N_effective: int = field(init=False, default=0)

    def __post_init__(self):
        if self.n <= 2:
            raise PreconditionError("mesh requires n >= 3 (log n > 1)")
        if self.K0 <= 4:
            raise PreconditionError("mesh exponent K0 must exceed 4")
        if self.C0 <= 0 or self.beta < 8:
            raise PreconditionError("need C0 > 0 and beta >= 8")
        n_paper = int(self.n**2 / math.log(self.n) ** self.K0)
        object.__setattr__(self, "N_paper", n_paper)
        object.__setattr__(
            self, "N_effective", max(n_paper, self.beta * self.n, 2 * self.n + 1)
        )


def build_mesh(n: int, K0: float = 5.0, C0: float = 2.0, beta: int = 64) -> MeshConfig:
    """Mesh for degree n; natural log throughout."""
    return MeshConfig(n=n, K0=K0, C0=C0, beta=beta)


@dataclass(frozen=True)
class SiteRecord:
    alpha: int
    x: float
    p: complex
    dp: complex
    Y: float
    Z: float
    flag_a_prime: bool
    flag_a_doubleprime: bool

    @property
    def flag_a(self) -> bool:
        return self.flag_a_prime and self.flag_a_doubleprime


@dataclass(frozen=True)
class MinimaProcess:
    """Flagged sites and their thinning by bad arcs."""

    records: tuple[SiteRecord, ...]
    mesh: MeshConfig
    thinned_mask: np.ndarray  # True where the record survives thinning
    fallback_min: float  # min over raw mesh values, for the no-flag fallback

    @property
    def x_values(self) -> np.ndarray:
        """X_alpha = Z_alpha on the flagged set (absent sites are +inf)."""
        return np.array([r.Z for r in self.records])

    def thinned(self) -> tuple[SiteRecord, ...]:
        return tuple(r for r, keep in zip(self.records, self.thinned_mask) if keep)


def linearize_site(p: complex, dp: complex, n: int) -> tuple[float, float]:
    """(Y, Z) of the local linearization; requires dp != 0."""
    if dp == 0:
        raise PreconditionError("degenerate derivative: dp = 0")
    cross = p * np.conj(dp)
    y = -cross.real / abs(dp) ** 2
    z = n * cross.imag / abs(dp)
    return float(y), float(z)


def select_minima(
    poly: PolySample, mesh: MeshConfig, kappa: float = 0.1
) -> MinimaProcess:
    """Flag near-local minimizers on the mesh and assemble the point process.

    Uses one FFT mesh evaluation for P and one for P'.  Sites with dp = 0
    are excluded (they fail A'' anyway).  The thinned mask removes records
    whose angle fails n^kappa-smoothness.
    """
    from .arithmetic import classify_bad_arcs

    n, N = mesh.n, mesh.N_effective
    if poly.n != n:
        raise PreconditionError("mesh was built for a different degree")
    p = evaluate_mesh(poly, N, order=0)
    dp = evaluate_mesh(poly, N, order=1)
    abs_dp = np.abs(dp)
    ok = abs_dp > 0
    cross = p * np.conj(dp)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.where(ok, -cross.real / abs_dp**2, np.inf)
        z = np.where(ok, n * cross.imag / np.where(ok, abs_dp, 1.0), np.inf)
    log_n = math.log(n)
    a_prime = (np.abs(y) <= math.pi / N) & (np.abs(z) <= log_n)
    a_dp = (
        (np.abs(p) <= n**-0.5)
        & (abs_dp >= n * log_n ** (-mesh.K0 / 2))
        & (abs_dp <= mesh.C0 * n * math.sqrt(log_n))
    )
    flagged = np.flatnonzero(a_prime & a_dp & ok)
    alphas = flagged + 1  # mesh index alpha runs 1..N
    xs = 2 * math.pi * alphas / N
    records = tuple(
        SiteRecord(
            alpha=int(a),
            x=float(x),
            p=complex(p[i]),
            dp=complex(dp[i]),
            Y=float(y[i]),
            Z=float(z[i]),
            flag_a_prime=True,
            flag_a_doubleprime=True,
        )
        for a, x, i in zip(alphas, xs, flagged)
    )
    bad = classify_bad_arcs(mesh, kappa)
    thinned_mask = np.array([not bad[r.alpha - 1] for r in records], dtype=bool)
    return MinimaProcess(
        records=records,
        mesh=mesh,
        thinned_mask=thinned_mask,
        fallback_min=float(np.min(np.abs(p))),
    )


@dataclass(frozen=True)
class GlobalMin:
    x: float
    value: float
    used_fallback: bool = False


def _make_abs_evaluator(poly: PolySample):
    """|P(x)| vectorized over points, via cumulative powers of e(ix).

    One complex exponential per point; the 2n+1 basis powers come from a
    cumulative product, which is much cheaper than exponentiating the full
    outer product and loses only ~sqrt(2n) ulp of accuracy.
    """
    c, j_min = poly.exp_coeffs()
    deg = len(c)

    def f(xs: np.ndarray) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
        z = np.exp(1j * xs)
        steps = np.empty((deg, len(xs)), dtype=np.complex128)
        steps[0] = np.exp(1j * j_min * xs)
        steps[1:] = z
        return np.abs(c @ np.cumprod(steps, axis=0))

    return f


def _golden_refine(f, lo: float, hi: float, iters: int) -> tuple[float, float]:
    """Golden-section minimization of f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def _golden_refine_vec(f, lo: np.ndarray, hi: np.ndarray, iters: int):
    """Golden-section minimization of f over a batch of brackets."""
    invphi = (math.sqrt(5.0) - 1) / 2
    a, b = np.asarray(lo, dtype=np.float64).copy(), np.asarray(hi, dtype=np.float64).copy()
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc < fd
        old_c, old_fc, old_d, old_fd = c, fc, d, fd
        b = np.where(left, old_d, b)
        a = np.where(left, a, old_c)
        new_c = b - invphi * (b - a)
        new_d = a + invphi * (b - a)
        # only one probe per bracket actually moves; evaluate just that one
        fprobe = f(np.where(left, new_c, new_d))
        c = np.where(left, new_c, old_d)
        fc = np.where(left, fprobe, old_fd)
        d = np.where(left, old_c, new_d)
        fd = np.where(left, old_fc, fprobe)
    pick_c = fc < fd
    return np.where(pick_c, c, d), np.where(pick_c, fc, fd)


def global_min(
    poly: PolySample,
    method: str = "mesh_linearized",
    mesh: MeshConfig | None = None,
    resolution: int = 0,
    refine_iters: int = 40,
    kappa: float = 0.1,
) -> GlobalMin:
    """Global minimum of |P| over the circle.

    ``mesh_linearized`` takes the best flagged linearized minimum |Z|/n at
    x_a + Y_a, falling back (with a flag) to the raw mesh minimum when no
    site is flagged.  ``dense_oracle`` scans a uniform grid of ``resolution``
    points and runs ``refine_iters`` golden-section steps in the best
    bracket.
    """
    n = poly.n
    if n == 0:
        return GlobalMin(x=0.0, value=abs(complex(poly.coeffs[0])) * poly.spec.normalization)
    if method == "mesh_linearized":
        if mesh is None:
            mesh = build_mesh(n)
        proc = select_minima(poly, mesh, kappa=kappa)
        if not proc.records:
            vals = np.abs(evaluate_mesh(poly, mesh.N_effective, order=0))
            i = int(np.argmin(vals))
            return GlobalMin(
                x=2 * math.pi * (i + 1) / mesh.N_effective,
                value=float(vals[i]),
                used_fallback=True,
            )
        best = min(proc.records, key=lambda r: abs(r.Z))
        return GlobalMin(x=best.x + best.Y, value=abs(best.Z) / n, used_fallback=False)
    if method == "dense_oracle":
        if resolution < 4 * n:
            raise PreconditionError("dense_oracle requires resolution >= 4n")
        p = evaluate_mesh(poly, resolution, order=0)
        dp = evaluate_mesh(poly, resolution, order=1)
        vals = np.abs(p)
        abs_dp = np.abs(dp)
        h = 2 * math.pi / resolution
        # Candidate basins: grid points whose linearization recenters within
        # one spacing.  Competing close approaches differ by far less than
        # the grid noise |P'| * h, so the raw grid argmin alone is unreliable;
        # the linearized minimum |Im(P conj P')| / |P'| ranks basins to
        # second order and a curvature margin covers its error.
        ok = abs_dp > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            y = np.where(ok, -(p * np.conj(dp)).real / abs_dp**2, np.inf)
            lin = np.where(ok, np.abs((p * np.conj(dp)).imag) / np.where(ok, abs_dp, 1.0), np.inf)
        cand = np.flatnonzero((np.abs(y) <= h) & ok)
        i0 = int(np.argmin(vals))
        if len(cand) == 0:
            cand = np.array([i0])
            lin = vals
        sup_pp = float(np.abs(evaluate_mesh(poly, resolution, order=2)).max())
        margin = 2.0 * sup_pp * h * h
        keep = cand[lin[cand] <= lin[cand].min() + margin]
        if len(keep) > 64:
            keep = keep[np.argsort(lin[keep])[:64]]
        if i0 not in keep:
            keep = np.append(keep, i0)
        centers = 2 * math.pi * (keep + 1) / resolution
        f = _make_abs_evaluator(poly)
        xs, fs = _golden_refine_vec(f, centers - 1.5 * h, centers + 1.5 * h, refine_iters)
        j = int(np.argmin(fs))
        x_star, v = float(xs[j]), float(fs[j])
        if vals[i0] < v:
            x_star, v = 2 * math.pi * (i0 + 1) / resolution, float(vals[i0])
        return GlobalMin(x=x_star, value=v)
    raise PreconditionError(f"unknown method {method!r}")


def check_derivative_event(
    poly: PolySample, k: int, Kexp: float
) -> tuple[bool, float]:
    """Estimate sup_s |tilde-P^{(k)}(s)| = n^{-k} sup_x |P^{(k)}(x)|.

    Dense mesh of >= 16n points plus local refinement around the argmax;
    holds iff the sup is <= (ln n)^Kexp.
    """
    if k not in (0, 1, 2):
        raise PreconditionError("k must be <= 2")
    n = poly.n
    c, j_min = poly.exp_coeffs()
    j = np.arange(j_min, j_min + len(c))
    cj = c * (1j * j) ** k
    N = max(32 * n, 256)
    buf = np.zeros(N, dtype=np.complex128)
    np.add.at(buf, np.mod(j, N), cj)
    vals = np.abs(np.fft.ifft(buf) * N)
    i = int(np.argmax(vals))
    x0 = 2 * math.pi * i / N
    h = 2 * math.pi / N
    local = x0 + np.linspace(-h, h, 65)
    lv = np.abs(np.exp(1j * np.outer(local, j)) @ cj)
    sup = float(max(vals[i], lv.max())) / float(max(n, 1)) ** k
    return sup <= math.log(n) ** Kexp, sup


def check_separation(process: MinimaProcess, K0: float | None = None) -> list[tuple[int, int]]:
    """Violations of the near-arc separation statement.

    Returns flagged index pairs (a, a') with circular distance in
    [2, n/(ln n)^{3 K0}], plus adjacent flagged pairs whose lower-index Y
    falls outside [pi/N - pi/(N (ln n)^{K0/4}), pi/N].
    """
    mesh = process.mesh
    if K0 is None:
        K0 = mesh.K0
    n, N = mesh.n, mesh.N_effective
    log_n = math.log(n)
    band_hi = n / log_n ** (3 * K0)
    alphas = np.array([r.alpha for r in process.records])
    out: list[tuple[int, int]] = []
    recs = process.records
    for i in range(len(alphas)):
        for j in range(i + 1, len(alphas)):
            d = abs(int(alphas[j]) - int(alphas[i]))
            d = min(d, N - d)
            if 2 <= d <= band_hi:
                out.append((int(alphas[i]), int(alphas[j])))
            elif d == 1:
                lo = recs[i] if recs[i].alpha < recs[j].alpha else recs[j]
                y_lo = math.pi / N - math.pi / (N * log_n ** (K0 / 4))
                if not (y_lo <= lo.Y <= math.pi / N):
                    out.append((int(alphas[i]), int(alphas[j])))
    return out


def process_to_csv(process: MinimaProcess) -> str:
    """Flagged sites as CSV: alpha, x, Re p, Im p, Re dp, Im dp, Y, Z, flags."""
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(
        ["alpha", "x", "re_p", "im_p", "re_dp", "im_dp", "Y", "Z", "flag_a", "thinned_keep"]
    )
    for r, keep in zip(process.records, process.thinned_mask):
        w.writerow(
            [
                r.alpha,
                f"{r.x:.17g}",
                f"{r.p.real:.17g}",
                f"{r.p.imag:.17g}",
                f"{r.dp.real:.17g}",
                f"{r.dp.imag:.17g}",
                f"{r.Y:.17g}",
                f"{r.Z:.17g}",
                int(r.flag_a),
                int(bool(keep)),
            ]
        )
    return buf.getvalue()
