"""Galerkin realization of the measure Laplacian and its Dirichlet spectrum.

The quadratic form int <grad u, grad v> dx over piecewise-linear (1D) or
bilinear (2D tensor) hat functions gives the stiffness matrix K; the L^2(mu)
pairing of an atomic measure gives the mass matrix

    M_ij = sum_atoms w phi_i(x) phi_j(x),

which is positive semidefinite with rank at most the number of atoms.  Hat
functions untouched by every atom form the deflation set -- the discrete
counterpart of trial functions vanishing mu-almost everywhere -- and the
spectrum is the set of finite eigenvalues of the pencil K c = lambda M c,
obtained from the symmetric reduction of M by K^{-1} so the singular-M case
stays well-posed.  A mesh-free "string" assembly with nodes exactly at the
atoms provides the independent cross-check path.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    AssemblyError,
    BoundaryAtomWarning,
    BudgetExceeded,
    DomainError,
    EmptyMeasure,
    NumericalError,
    ValidationError,
)
from .ifs import MeasureApprox

#: interior size below which the dense symmetric eigensolver path is used
DENSE_DOF_LIMIT = 4096

#: atom count below which the rank-revealing atomic reduction path is used
ATOMIC_PATH_LIMIT = 4096

_BOUNDARY_TOL = 1e-12


# --------------------------------------------------------------------------
# meshes
# --------------------------------------------------------------------------

@dataclass(eq=False)
class Mesh:
    """Uniform tensor mesh: 1D interval nodes or a 2D grid (index = ix*ny + iy)."""

    axes: tuple[np.ndarray, ...]

    def __post_init__(self):
        for ax in self.axes:
            if len(ax) < 2 or np.any(np.diff(ax) <= 0):
                raise ValidationError("mesh nodes must be strictly increasing")

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(ax) for ax in self.axes)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    def node_coords(self) -> np.ndarray:
        if self.dim == 1:
            return self.axes[0][:, None]
        X, Y = np.meshgrid(self.axes[0], self.axes[1], indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def boundary_mask(self) -> np.ndarray:
        if self.dim == 1:
            mask = np.zeros(self.n_nodes, dtype=bool)
            mask[0] = mask[-1] = True
            return mask
        nx, ny = self.shape
        mask = np.zeros((nx, ny), dtype=bool)
        mask[0, :] = mask[-1, :] = True
        mask[:, 0] = mask[:, -1] = True
        return mask.ravel()

    def interior_indices(self) -> np.ndarray:
        return np.where(~self.boundary_mask())[0]

    def bounds(self) -> list[tuple[float, float]]:
        return [(float(ax[0]), float(ax[-1])) for ax in self.axes]


def build_mesh(domain, h: float | None = None, *, triadic_level: int | None = None,
               max_elements: int = 4_000_000) -> Mesh:
    """Uniform mesh with element size <= h, or a triadic-snapped 1D mesh.

    ``domain`` is (a, b) for 1D or ((a, b), (c, d)) for 2D.  Triadic snapping
    places 3^level elements so Cantor-cylinder endpoints land on nodes.
    """
    dom = np.asarray(domain, dtype=float)
    if dom.ndim == 1:
        dom = dom[None, :]
    if dom.shape[1] != 2 or np.any(dom[:, 0] >= dom[:, 1]):
        raise ValidationError("degenerate domain")
    if triadic_level is not None:
        if dom.shape[0] != 1:
            raise ValidationError("triadic snapping applies to 1D meshes")
        n_el = 3**triadic_level
        if n_el > max_elements:
            raise BudgetExceeded(f"3^{triadic_level} elements exceed budget {max_elements}")
        a, b = dom[0]
        return Mesh((a + (b - a) * np.arange(n_el + 1) / n_el,))
    if h is None or h <= 0:
        raise ValidationError("element size h must be positive")
    counts = [max(1, math.ceil((b - a) / h - 1e-12)) for a, b in dom]
    total = int(np.prod(counts))
    if total > max_elements:
        raise BudgetExceeded(f"{total} elements exceed budget {max_elements}")
    axes = tuple(
        a + (b - a) * np.arange(n_el + 1) / n_el for (a, b), n_el in zip(dom, counts)
    )
    return Mesh(axes)


# --------------------------------------------------------------------------
# assembly
# --------------------------------------------------------------------------

def _stiffness_1d(nodes: np.ndarray) -> sp.csr_matrix:
    h = np.diff(nodes)
    inv = 1.0 / h
    n = len(nodes)
    main = np.zeros(n)
    main[:-1] += inv
    main[1:] += inv
    return sp.diags([-inv, main, -inv], offsets=[-1, 0, 1], format="csr")


def _mass_1d_lebesgue(nodes: np.ndarray) -> sp.csr_matrix:
    # consistent PL mass for Lebesgue measure; used only for the 2D tensor product
    h = np.diff(nodes)
    n = len(nodes)
    main = np.zeros(n)
    main[:-1] += h / 3.0
    main[1:] += h / 3.0
    off = h / 6.0
    return sp.diags([off, main, off], offsets=[-1, 0, 1], format="csr")


def assemble_stiffness(mesh: Mesh) -> sp.csr_matrix:
    """Dirichlet stiffness matrix over interior nodes (exact element integrals).

    1D: piecewise-linear hats, tridiagonal 1/h couplings.  2D: bilinear hats
    on the tensor grid, assembled as Kx (x) My + Mx (x) Ky, which is the exact
    integral of grad phi_i . grad phi_j over rectangle elements.
    """
    if mesh.dim == 1:
        K_full = _stiffness_1d(mesh.axes[0])
    else:
        kx, mx = _stiffness_1d(mesh.axes[0]), _mass_1d_lebesgue(mesh.axes[0])
        ky, my = _stiffness_1d(mesh.axes[1]), _mass_1d_lebesgue(mesh.axes[1])
        K_full = sp.kron(kx, my) + sp.kron(mx, ky)
    idx = mesh.interior_indices()
    return sp.csr_matrix(K_full.tocsr()[np.ix_(idx, idx)])


_NODE_SNAP = 1e-7


def _locate(ax: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Element index and local coordinate t in [0,1] for points on an axis.

    Points within 1e-7 of a node (relative to the element size) are snapped
    onto it, so atoms meant to sit on mesh nodes are not smeared by the float
    drift between composed map images and node divisions.
    """
    el = np.clip(np.searchsorted(ax, x, side="right") - 1, 0, len(ax) - 2)
    t = np.clip((x - ax[el]) / (ax[el + 1] - ax[el]), 0.0, 1.0)
    t[t < _NODE_SNAP] = 0.0
    t[t > 1.0 - _NODE_SNAP] = 1.0
    return el, t


def atom_hat_matrix(mesh: Mesh, mu: MeasureApprox) -> tuple[sp.csr_matrix, np.ndarray, float]:
    """Hat values Phi (kept atoms x interior nodes), kept weights, dropped mass.

    Atoms outside the closed mesh domain raise DomainError; atoms within
    tolerance of the Dirichlet boundary are dropped with a warning (the
    Dirichlet representative has zero boundary trace, so their hat row would
    vanish anyway).
    """
    if mu.dim != mesh.dim:
        raise ValidationError("measure dimension does not match the mesh")
    pts = mu.atoms
    drop = np.zeros(mu.atom_count, dtype=bool)
    for d, (a, b) in enumerate(mesh.bounds()):
        x = pts[:, d]
        scale = max(b - a, 1.0)
        if np.any(x < a - _BOUNDARY_TOL * scale) or np.any(x > b + _BOUNDARY_TOL * scale):
            raise DomainError("atom outside the mesh domain")
        drop |= np.abs(x - a) <= _BOUNDARY_TOL * scale
        drop |= np.abs(x - b) <= _BOUNDARY_TOL * scale
    dropped_mass = float(mu.weights[drop].sum())
    if dropped_mass > 0.0:
        warnings.warn(
            f"dropped {int(drop.sum())} boundary atoms carrying mass {dropped_mass:.3g}",
            BoundaryAtomWarning,
            stacklevel=2,
        )
    kept = ~drop
    pts = pts[kept]
    w = mu.weights[kept].copy()
    if len(pts) == 0:
        raise EmptyMeasure("no atoms remain inside the domain")

    n_atoms = len(pts)
    if mesh.dim == 1:
        el, t = _locate(mesh.axes[0], pts[:, 0])
        rows = np.repeat(np.arange(n_atoms), 2)
        cols = np.column_stack([el, el + 1]).ravel()
        vals = np.column_stack([1.0 - t, t]).ravel()
    else:
        nx, ny = mesh.shape
        ex, tx = _locate(mesh.axes[0], pts[:, 0])
        ey, ty = _locate(mesh.axes[1], pts[:, 1])
        rows = np.repeat(np.arange(n_atoms), 4)
        base = ex * ny + ey
        cols = np.column_stack([base, base + ny, base + ny + 1, base + 1]).ravel()
        vals = np.column_stack([
            (1 - tx) * (1 - ty), tx * (1 - ty), tx * ty, (1 - tx) * ty,
        ]).ravel()
    phi_full = sp.csr_matrix((vals, (rows, cols)), shape=(n_atoms, mesh.n_nodes))
    idx = mesh.interior_indices()
    return sp.csr_matrix(phi_full[:, idx]), w, dropped_mass


def assemble_measure_mass(mesh: Mesh, mu: MeasureApprox) -> sp.csr_matrix:
    """M_ij = sum_atoms w phi_i phi_j over interior nodes (PSD by construction)."""
    phi, w, _ = atom_hat_matrix(mesh, mu)
    M = phi.T @ sp.diags(w) @ phi
    return sp.csr_matrix(M)


@dataclass(eq=False)
class GalerkinSystem:
    """Stiffness/mass pair with the atom quadrature that produced it."""

    mesh: Mesh
    K: sp.csr_matrix
    M: sp.csr_matrix
    phi: sp.csr_matrix
    atom_weights: np.ndarray
    dropped_mass: float
    _factor: object = field(default=None, repr=False)
    _lambda1: float | None = field(default=None, repr=False)

    @property
    def n_interior(self) -> int:
        return self.K.shape[0]

    @property
    def deflation(self) -> np.ndarray:
        """Interior node indices whose M row vanishes (basis functions mu-a.e. 0)."""
        row_norm = np.sqrt(np.asarray(self.M.multiply(self.M).sum(axis=1)).ravel())
        return np.where(row_norm < 1e-14)[0]

    def solve_K(self, B: np.ndarray) -> np.ndarray:
        """K^{-1} B via banded Cholesky (1D) or sparse LU (2D)."""
        if self._factor is None:
            if self.mesh.dim == 1:
                Kb = self.K.todia()
                n = self.n_interior
                ab = np.zeros((2, n))
                ab[0, 1:] = Kb.data[list(Kb.offsets).index(1)][1:] if 1 in Kb.offsets else 0.0
                ab[1] = Kb.diagonal()
                try:
                    cb = sla.cholesky_banded(ab, lower=False)
                except np.linalg.LinAlgError as exc:
                    raise AssemblyError("stiffness matrix is not positive definite") from exc
                self._factor = ("banded", cb)
            else:
                try:
                    lu = spla.splu(self.K.tocsc())
                except RuntimeError as exc:
                    raise AssemblyError("stiffness factorization failed") from exc
                self._factor = ("splu", lu)
        kind, fac = self._factor
        B = np.asarray(B, dtype=float)
        if kind == "banded":
            return sla.cho_solve_banded((fac, False), B)
        return fac.solve(B)

    def l2mu_norm(self, coeffs_interior: np.ndarray) -> float:
        vals = self.phi @ coeffs_interior
        return float(np.sqrt(np.sum(self.atom_weights * vals * vals)))

    def lambda1(self) -> float:
        if self._lambda1 is None:
            self._lambda1 = float(solve_spectrum(self, 1).eigenvalues[0])
        return self._lambda1


def build_system(mesh: Mesh, mu: MeasureApprox) -> GalerkinSystem:
    K = assemble_stiffness(mesh)
    phi, w, dropped = atom_hat_matrix(mesh, mu)
    M = sp.csr_matrix(phi.T @ sp.diags(w) @ phi)
    return GalerkinSystem(mesh=mesh, K=K, M=M, phi=phi, atom_weights=w,
                          dropped_mass=dropped)


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------

@dataclass(eq=False)
class Spectrum:
    """Sorted eigenvalues with M-orthonormal coefficient vectors (full node layout)."""

    eigenvalues: np.ndarray
    coefficients: np.ndarray  # (n_nodes, k)
    residuals: np.ndarray
    nodes: np.ndarray
    method: str = ""
    rank_note: str | None = None

    @property
    def count(self) -> int:
        return len(self.eigenvalues)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("k,lambda,residual\n")
            for i, (lam, res) in enumerate(zip(self.eigenvalues, self.residuals), start=1):
                f.write("%d,%.17g,%.17g\n" % (i, lam, res))


def _embed_full(mesh: Mesh, interior_vecs: np.ndarray) -> np.ndarray:
    full = np.zeros((mesh.n_nodes, interior_vecs.shape[1]))
    full[mesh.interior_indices()] = interior_vecs
    return full


def _finalize(sys: GalerkinSystem, lams: np.ndarray, vecs: np.ndarray, method: str,
              requested: int) -> Spectrum:
    order = np.argsort(lams)
    lams = lams[order]
    vecs = vecs[:, order]
    # enforce exact M-normalization per vector
    for j in range(vecs.shape[1]):
        nrm = math.sqrt(max(float(vecs[:, j] @ (sys.M @ vecs[:, j])), 0.0))
        if nrm == 0.0:
            raise NumericalError("eigenvector with vanishing L2(mu) norm")
        vecs[:, j] /= nrm
    res = np.array([
        np.linalg.norm(sys.K @ vecs[:, j] - lams[j] * (sys.M @ vecs[:, j]))
        for j in range(vecs.shape[1])
    ])
    note = None
    if len(lams) < requested:
        note = (f"requested {requested} pairs but the measure mass matrix has "
                f"rank {len(lams)}")
    return Spectrum(
        eigenvalues=lams,
        coefficients=_embed_full(sys.mesh, vecs),
        residuals=res,
        nodes=sys.mesh.node_coords(),
        method=method,
        rank_note=note,
    )


def solve_spectrum(sys: GalerkinSystem, k: int) -> Spectrum:
    """First k finite eigenvalues of K c = lambda M c with M-orthonormal vectors.

    The pencil is reduced symmetrically by K (positive definite on interior
    nodes): eigenvalues are the reciprocals of the nonzero spectrum of
    K^{-1/2} M K^{-1/2}, so the measure-null subspace never enters.  Three
    equivalent paths are chosen by size:

    * atomic: eigendecomposition of W^{1/2} Phi K^{-1} Phi^T W^{1/2}
      (rank(M) x rank(M), exact and deterministic) when the atom count is
      moderate;
    * dense: Cholesky reduction of the full interior pencil;
    * iterative: ARPACK on the pencil M z = mu K z for the largest mu.

    Returns min(k, rank(M)) pairs, with a note when fewer than k exist.
    """
    if k < 1:
        raise ValidationError("k must be at least 1")
    n = sys.n_interior
    n_atoms = sys.phi.shape[0]

    if n_atoms <= ATOMIC_PATH_LIMIT and n_atoms <= n:
        sqw = np.sqrt(sys.atom_weights)
        if sys.mesh.dim == 1:
            # K^{-1} columns are the 1D Dirichlet Green kernel at the nodes
            # (exact for piecewise-linear hats), evaluated in closed form --
            # far more accurate than a factorized solve on stiff meshes
            xs_all = sys.mesh.axes[0]
            a, b = xs_all[0], xs_all[-1]
            xi = xs_all[sys.mesh.interior_indices()]
            csr = sys.phi.tocsr()
            X = np.zeros((n, n_atoms))
            for j in range(n_atoms):
                sl = slice(csr.indptr[j], csr.indptr[j + 1])
                for c, v in zip(csr.indices[sl], csr.data[sl]):
                    xc = xi[c]
                    X[:, j] += v * (
                        (np.minimum(xi, xc) - a) * (b - np.maximum(xi, xc)) / (b - a)
                    )
            X *= sqw[None, :]
        else:
            rhs = np.asarray((sys.phi.T).todense()) * sqw[None, :]
            X = sys.solve_K(rhs)  # K^{-1} Phi^T W^{1/2}
        G = np.asarray(sys.phi @ X) * sqw[:, None]
        G = 0.5 * (G + G.T)
        mu_vals, Z = sla.eigh(G)
        tol = max(mu_vals.max(), 0.0) * 1e-13
        pos = np.where(mu_vals > tol)[0][::-1]  # descending mu = ascending lambda
        take = pos[: min(k, len(pos))]
        lams = 1.0 / mu_vals[take]
        vecs = X @ (Z[:, take] / mu_vals[take][None, :])
        return _finalize(sys, lams, vecs, "atomic-reduction", k)

    if n <= DENSE_DOF_LIMIT:
        Kd = sys.K.toarray()
        Md = sys.M.toarray()
        try:
            L = sla.cholesky(Kd, lower=True)
        except sla.LinAlgError as exc:
            raise AssemblyError("stiffness matrix is not positive definite") from exc
        # B = L^{-1} M L^{-T}
        Y = sla.solve_triangular(L, Md, lower=True)
        B = sla.solve_triangular(L, Y.T, lower=True).T
        B = 0.5 * (B + B.T)
        mu_vals, Z = sla.eigh(B)
        tol = max(mu_vals.max(), 0.0) * 1e-13
        pos = np.where(mu_vals > tol)[0][::-1]
        take = pos[: min(k, len(pos))]
        lams = 1.0 / mu_vals[take]
        zs = Z[:, take] / np.sqrt(mu_vals[take])[None, :]
        vecs = sla.solve_triangular(L, zs, lower=True, trans="T")
        return _finalize(sys, lams, vecs, "dense-cholesky", k)

    kk = min(k, n_atoms, n - 1)
    v0 = np.full(n, 1.0 / math.sqrt(n))
    try:
        mu_vals, Z = spla.eigsh(sys.M, k=kk, M=sys.K, which="LM", tol=0, v0=v0)
    except spla.ArpackNoConvergence as exc:
        raise AssemblyError("iterative eigensolver failed to converge") from exc
    keep = mu_vals > mu_vals.max() * 1e-13
    lams = 1.0 / mu_vals[keep]
    return _finalize(sys, lams, Z[:, keep], "shift-invert", k)


def solve_poisson(sys: GalerkinSystem, f_atoms: np.ndarray) -> np.ndarray:
    """Solve the measure Poisson problem: K u = load(f) with f given at atoms.

    The load vector is int phi_i f dmu = sum_atoms w f phi_i, exact for the
    atomic measure.  The solution norm obeys ||u||_{L2(mu)} <=
    (1/lambda_1) ||f||_{L2(mu)}; the bound is asserted with the computed
    lambda_1 and a NumericalError is raised if violated.
    """
    f = np.asarray(f_atoms, dtype=float)
    if f.shape != sys.atom_weights.shape:
        raise ValidationError("f must be sampled at the (kept) atoms")
    load = sys.phi.T @ (sys.atom_weights * f)
    u_int = sys.solve_K(load)
    norm_u = sys.l2mu_norm(u_int)
    norm_f = float(np.sqrt(np.sum(sys.atom_weights * f * f)))
    lam1 = sys.lambda1()
    if norm_u > norm_f / lam1 * (1.0 + 1e-9) + 1e-300:
        raise NumericalError(
            f"Poisson bound violated: ||u|| = {norm_u:.6g} > ||f||/lambda1 = {norm_f / lam1:.6g}"
        )
    full = np.zeros(sys.mesh.n_nodes)
    full[sys.mesh.interior_indices()] = u_int
    return full


def discrete_string_oracle(mu: MeasureApprox, k: int | None = None,
                           domain: tuple[float, float] = (0.0, 1.0)) -> Spectrum:
    """Mesh-free vibrating-string eigensolve with nodes exactly at the atoms.

    Springs of stiffness 1/gap join consecutive atoms (and the Dirichlet
    endpoints); the mass matrix is the diagonal of atom weights.  This is the
    Galerkin pencil of the atom-induced mesh, solved densely -- the
    independent cross-check for :func:`solve_spectrum`.
    """
    if mu.dim != 1:
        raise ValidationError("string oracle needs a 1D measure")
    a, b = domain
    x = mu.atoms[:, 0]
    w = mu.weights
    if np.any(x < a - _BOUNDARY_TOL) or np.any(x > b + _BOUNDARY_TOL):
        raise DomainError("atom outside the string domain")
    on_boundary = (np.abs(x - a) <= _BOUNDARY_TOL) | (np.abs(x - b) <= _BOUNDARY_TOL)
    if np.any(on_boundary):
        warnings.warn(
            f"dropped {int(on_boundary.sum())} boundary atoms carrying mass "
            f"{float(w[on_boundary].sum()):.3g}",
            BoundaryAtomWarning,
            stacklevel=2,
        )
        x, w = x[~on_boundary], w[~on_boundary]
    if len(x) == 0:
        raise EmptyMeasure("no interior atoms")
    order = np.argsort(x)
    x, w = x[order], w[order]
    # merge duplicate positions
    uniq, inv = np.unique(x, return_inverse=True)
    wm = np.zeros(len(uniq))
    np.add.at(wm, inv, w)
    x, w = uniq, wm

    n = len(x)
    gaps = np.diff(np.concatenate([[a], x, [b]]))
    inv_g = 1.0 / gaps
    diag = inv_g[:-1] + inv_g[1:]
    off = -inv_g[1:-1]
    scale = 1.0 / np.sqrt(w)
    # symmetric standard form D^{-1/2} K D^{-1/2}, still tridiagonal
    d_std = diag * scale**2
    e_std = off * scale[:-1] * scale[1:]
    if n == 1:
        lams = np.array([d_std[0]])
        Z = np.ones((1, 1))
    else:
        try:
            # stev (implicit QL/QR) copes with the huge dynamic range of
            # fine-gap strings where the default stemr driver gives up
            lams, Z = sla.eigh_tridiagonal(d_std, e_std, lapack_driver="stev")
        except np.linalg.LinAlgError:
            dense = np.diag(d_std) + np.diag(e_std, 1) + np.diag(e_std, -1)
            lams, Z = sla.eigh(dense)
    kk = n if k is None else min(k, n)
    lams = lams[:kk]
    vecs = (Z[:, :kk].T * scale).T  # back to pencil coordinates, M-orthonormal
    Kmat = sp.diags([off, diag, off], offsets=[-1, 0, 1], format="csr") if n > 1 \
        else sp.csr_matrix(np.array([[diag[0]]]))
    res = np.array([
        np.linalg.norm(Kmat @ vecs[:, j] - lams[j] * (w * vecs[:, j]))
        for j in range(kk)
    ])
    return Spectrum(eigenvalues=lams, coefficients=vecs, residuals=res,
                    nodes=x[:, None], method="string-oracle",
                    rank_note=None if k is None or k <= n else
                    f"requested {k} pairs but only {n} atoms")


# --------------------------------------------------------------------------
# eigenvalue counting
# --------------------------------------------------------------------------

@dataclass(eq=False)
class WeylFit:
    """Counting function N(lambda) with the log-log exponent over the middle half."""

    lambdas: np.ndarray
    counts: np.ndarray
    exponent: float
    window: tuple[int, int]
    flagged: str | None = None

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("lambda,count\n")
            for lam, c in zip(self.lambdas, self.counts):
                f.write("%.17g,%d\n" % (lam, c))


def weyl_counting(spectrum: Spectrum | np.ndarray, min_eigenvalues: int = 20) -> WeylFit:
    """N(lambda) table and least-squares exponent of ln N vs ln lambda.

    The fit runs over the middle two quartiles of the eigenvalue list, away
    from both the low-mode transient and the resolution tail.
    """
    lams = spectrum.eigenvalues if isinstance(spectrum, Spectrum) else np.asarray(spectrum, float)
    lams = np.sort(lams)
    counts = np.arange(1, len(lams) + 1)
    if len(lams) == 1:
        return WeylFit(lams, counts, float("nan"), (0, 0),
                       flagged="single eigenvalue; exponent undefined")
    if len(lams) < min_eigenvalues:
        raise ValidationError(f"need at least {min_eigenvalues} eigenvalues")
    lo, hi = len(lams) // 4, (3 * len(lams)) // 4
    x = np.log(lams[lo:hi])
    y = np.log(counts[lo:hi])
    exponent = float(np.polyfit(x, y, 1)[0])
    return WeylFit(lams, counts, exponent, (lo, hi))


def export_matrix_coo(path, A) -> None:
    """Write a matrix as 1-based coordinate triplets '%d %d %.17g'."""
    coo = sp.coo_matrix(A)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for i, j, v in zip(coo.row, coo.col, coo.data):
            f.write("%d %d %.17g\n" % (i + 1, j + 1, v))
