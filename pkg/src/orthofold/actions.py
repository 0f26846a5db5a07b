"""Concrete manifolds and the built-in catalog of group actions.

Points are float64 vectors in ambient coordinates. Projective points are
unit representatives (sign- or phase-ambiguous); complex coordinates are
stored as real vectors of doubled length, interleaved as
z_k = v[2k] + i v[2k+1], with the complex structure acting by
J v = interleave(i z).

Every catalog action is linear in ambient coordinates: an element g of the
group's canonical representation acts through the ambient matrix amb(g), and
act(g, x) renormalizes the image representative.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import groups, kernels
from .errors import InputError, PointSpecError, StabilizerError, UnknownActionError
from .numerics import Tolerance, DEFAULT_TOL

# ---------------------------------------------------------------------------
# manifold models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifoldModel:
    kind: str  # sphere | product_spheres | real_projective | complex_projective | euclidean
    ambient_dim: int
    intrinsic_dim: int
    factors: tuple = ()  # ambient dims of the sphere factors, product kind only

    @property
    def align_mode(self) -> int:
        if self.kind == "real_projective":
            return kernels.ALIGN_SIGN
        if self.kind == "complex_projective":
            return kernels.ALIGN_PHASE
        return kernels.ALIGN_NONE


def sphere(n: int) -> ManifoldModel:
    return ManifoldModel("sphere", n + 1, n)


def product_spheres(n1: int, n2: int) -> ManifoldModel:
    return ManifoldModel(
        "product_spheres", n1 + n2 + 2, n1 + n2, factors=(n1 + 1, n2 + 1)
    )


def real_projective(n: int) -> ManifoldModel:
    return ManifoldModel("real_projective", n + 1, n)


def complex_projective(n: int) -> ManifoldModel:
    return ManifoldModel("complex_projective", 2 * (n + 1), 2 * n)


def euclidean(d: int) -> ManifoldModel:
    return ManifoldModel("euclidean", d, d)


def to_complex(v: np.ndarray) -> np.ndarray:
    return v[..., 0::2] + 1j * v[..., 1::2]


def from_complex(z: np.ndarray) -> np.ndarray:
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def normalize(m: ManifoldModel, x: np.ndarray) -> np.ndarray:
    """Rescale to a valid representative (unit norms where required)."""
    x = np.asarray(x, dtype=np.float64)
    if m.kind == "euclidean":
        return x.copy()
    if m.kind == "product_spheres":
        d1 = m.factors[0]
        out = x.copy()
        out[..., :d1] /= np.linalg.norm(out[..., :d1], axis=-1, keepdims=True)
        out[..., d1:] /= np.linalg.norm(out[..., d1:], axis=-1, keepdims=True)
        return out
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def validate_point(m: ManifoldModel, x: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> None:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.ambient_dim,):
        raise InputError(f"point of shape {x.shape}, expected ({m.ambient_dim},)")
    if not np.all(np.isfinite(x)):
        raise InputError("point has non-finite entries")
    eps = max(tol.match_eps, 1e-9)
    if m.kind == "product_spheres":
        d1 = m.factors[0]
        if abs(np.linalg.norm(x[:d1]) - 1.0) > eps or abs(np.linalg.norm(x[d1:]) - 1.0) > eps:
            raise InputError("product-sphere representative factors must be unit vectors")
    elif m.kind != "euclidean":
        if abs(np.linalg.norm(x) - 1.0) > eps:
            raise InputError("representative must be a unit vector")


def sample_points(m: ManifoldModel, count: int, rng: np.random.Generator) -> np.ndarray:
    """Rotation-invariant sampling: uniform on spheres and projective spaces,
    standard gaussian for euclidean models."""
    if count < 0:
        raise InputError("sample count must be nonnegative")
    raw = rng.normal(size=(count, m.ambient_dim))
    if m.kind == "euclidean":
        return raw
    return normalize(m, raw)


def align_to(m: ManifoldModel, ref: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Representative of [y] nearest to the representative ref."""
    if m.kind == "real_projective":
        return y if float(ref @ y) >= 0.0 else -y
    if m.kind == "complex_projective":
        inner = complex(np.vdot(to_complex(y), to_complex(ref)))
        mag = abs(inner)
        if mag < 1e-12:
            return y.copy()
        return from_complex(to_complex(y) * (inner / mag))
    return y.copy()


def distance(m: ManifoldModel, x: np.ndarray, y: np.ndarray) -> float:
    if m.kind == "real_projective":
        g = min(abs(float(x @ y)), 1.0)
        return float(np.sqrt(max(2.0 - 2.0 * g, 0.0)))
    if m.kind == "complex_projective":
        g = min(abs(complex(np.vdot(to_complex(x), to_complex(y)))), 1.0)
        return float(np.sqrt(max(2.0 - 2.0 * g, 0.0)))
    return float(np.linalg.norm(x - y))


def pairwise_distances(m: ManifoldModel, pts: np.ndarray) -> np.ndarray:
    if m.kind == "real_projective":
        return kernels.pairwise_sign_aligned(pts)
    if m.kind == "complex_projective":
        return kernels.pairwise_phase_aligned(pts)
    return kernels.pairwise_euclidean(pts)


def is_same_point(m: ManifoldModel, x, y, tol: Tolerance = DEFAULT_TOL) -> bool:
    return distance(m, np.asarray(x, float), np.asarray(y, float)) <= tol.match_eps


def _householder_frame(x: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to the unit vector x."""
    n = x.size
    s = 1.0 if x[0] >= 0.0 else -1.0
    u = x.copy()
    u[0] += s
    h = np.eye(n) - 2.0 * np.outer(u, u) / float(u @ u)
    return h[:, 1:]


def _complex_householder_frame(z: np.ndarray) -> np.ndarray:
    """Complex orthonormal basis (columns) of the hyperplane orthogonal to z."""
    n = z.size
    s = z[0] / abs(z[0]) if abs(z[0]) > 1e-12 else 1.0 + 0.0j
    u = z.copy()
    u[0] += s
    h = np.eye(n, dtype=complex) - 2.0 * np.outer(u, u.conj()) / complex(u.conj() @ u)
    return h[:, 1:]


def tangent_frame(m: ManifoldModel, x: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the horizontal tangent space at a representative.

    Columns are ambient vectors: orthogonal to x on spheres, to x and Jx on
    complex projective models (where consecutive columns are J-paired), and
    the standard basis in the euclidean case.
    """
    validate_point(m, x, tol)
    if m.kind == "euclidean":
        return np.eye(m.ambient_dim)
    if m.kind in ("sphere", "real_projective"):
        return _householder_frame(x)
    if m.kind == "product_spheres":
        d1 = m.factors[0]
        f1 = _householder_frame(x[:d1])
        f2 = _householder_frame(x[d1:])
        out = np.zeros((m.ambient_dim, m.intrinsic_dim))
        out[:d1, : f1.shape[1]] = f1
        out[d1:, f1.shape[1] :] = f2
        return out
    # complex projective: realified complex frame, J-pairs adjacent
    z = to_complex(x)
    fz = _complex_householder_frame(z)
    cols = []
    for j in range(fz.shape[1]):
        cols.append(from_complex(fz[:, j]))
        cols.append(from_complex(1j * fz[:, j]))
    return np.column_stack(cols)


def ambient_complex_structure(m: ManifoldModel) -> np.ndarray:
    """The matrix of multiplication by i on interleaved real coordinates."""
    n = m.ambient_dim
    j = np.zeros((n, n))
    for k in range(n // 2):
        j[2 * k, 2 * k + 1] = -1.0
        j[2 * k + 1, 2 * k] = 1.0
    return j


# ---------------------------------------------------------------------------
# actions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalModel:
    endpoints: tuple
    projection: Callable  # (B, N) representatives -> (B,) values


@dataclass(frozen=True)
class ActionModel:
    """A smooth linear action of a compact matrix group on a manifold model."""

    name: str
    group: groups.GroupDescriptor
    manifold: ManifoldModel
    amb: Callable  # canonical element -> ambient matrix
    amb_lie: Callable  # canonical Lie generator -> ambient matrix
    special_points: Callable  # rng -> (m, N) measure-zero stratum representatives
    tx_tensor: Callable | None = None  # x -> (N, k, k) tensor for so3 refinement
    # For torus-kind groups: tuple of (coords, weight) with coords a fixed
    # index (i,) or a rotating pair (i, j), weight an integer vector over the
    # canonical angle parameters. Drives closed-form batched application.
    ambient_pairs: tuple | None = None
    interval: IntervalModel | None = None
    params: dict = field(default_factory=dict)

    def amb_batch(self, G: np.ndarray) -> np.ndarray:
        return np.stack([self.amb(g) for g in G])


def act(a: ActionModel, g: np.ndarray, x: np.ndarray) -> np.ndarray:
    return normalize(a.manifold, a.amb(g) @ x)


def act_batch(a: ActionModel, G: np.ndarray, x: np.ndarray) -> np.ndarray:
    return normalize(a.manifold, np.einsum("bij,j->bi", a.amb_batch(G), x))


def infinitesimal_action(
    a: ActionModel, x: np.ndarray, tol: Tolerance = DEFAULT_TOL
) -> np.ndarray:
    """Matrix whose columns are the frame coordinates of the generator fields.

    Column i holds the horizontal projection of amb_lie(basis_i) x at x; its
    rank is the orbit dimension through x.
    """
    frame = tangent_frame(a.manifold, x, tol)
    k = a.group.lie_dim
    out = np.empty((frame.shape[1], k))
    for i in range(k):
        out[:, i] = frame.T @ (a.amb_lie(a.group.lie[i]) @ x)
    return out


def differential_of_element(
    a: ActionModel, g: np.ndarray, x: np.ndarray, tol: Tolerance = DEFAULT_TOL
) -> np.ndarray:
    """Differential of the action of a stabilizer element, in frame coordinates.

    Requires act(g, x) to equal x as a manifold point; raises StabilizerError
    otherwise. The result is an orthogonal (intrinsic x intrinsic) matrix.
    """
    y = act(a, g, x)
    if distance(a.manifold, y, x) > max(tol.match_eps, 1e-7):
        raise StabilizerError("element does not stabilize the point")
    frame = tangent_frame(a.manifold, x, tol)
    amb = a.amb(g)
    m = a.manifold
    if m.kind == "real_projective":
        s = 1.0 if float((amb @ x) @ x) >= 0.0 else -1.0
        d = frame.T @ (s * amb) @ frame
    elif m.kind == "complex_projective":
        ax = amb @ x
        inner = complex(np.vdot(to_complex(ax), to_complex(x)))
        lam = inner / abs(inner)
        jmat = ambient_complex_structure(m)
        aligned = lam.real * amb + lam.imag * (jmat @ amb)
        d = frame.T @ aligned @ frame
    else:
        d = frame.T @ amb @ frame
    if not np.allclose(d.T @ d, np.eye(d.shape[0]), atol=1e-6):
        raise StabilizerError("differential is not orthogonal; point data inconsistent")
    return d


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


def _embed_so2_in_3(g2: np.ndarray) -> np.ndarray:
    out = np.eye(3)
    out[:2, :2] = g2
    return out


def _interleave_complex_matrix(gc: np.ndarray) -> np.ndarray:
    """Real matrix of a complex-linear map on interleaved coordinates."""
    n = gc.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[0::2, 0::2] = gc.real
    out[1::2, 1::2] = gc.real
    out[0::2, 1::2] = -gc.imag
    out[1::2, 0::2] = gc.imag
    return out


def _make_s2xs2() -> ActionModel:
    m = product_spheres(2, 2)
    g = groups.so3()

    def amb(q):
        out = np.zeros((6, 6))
        out[:3, :3] = q
        out[3:, 3:] = q
        return out

    def tx(x):
        t = np.zeros((6, 3, 3))
        for j in range(3):
            t[j, j, :] = x[:3]
            t[3 + j, j, :] = x[3:]
        return t

    def specials(rng):
        axes = [np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0])]
        extra = rng.normal(size=(4, 3))
        axes.extend(v / np.linalg.norm(v) for v in extra)
        pts = []
        for v in axes:
            pts.append(np.concatenate([v, v]))
            pts.append(np.concatenate([v, -v]))
        return np.array(pts)

    def proj(pts):
        pts = np.atleast_2d(pts)
        return np.einsum("bi,bi->b", pts[:, :3], pts[:, 3:])

    return ActionModel(
        name="s2xs2-so3",
        group=g,
        manifold=m,
        amb=amb,
        amb_lie=amb,
        special_points=specials,
        tx_tensor=tx,
        interval=IntervalModel((-1.0, 1.0), proj),
    )


def _make_rp2() -> ActionModel:
    m = real_projective(2)
    g = groups.so2()

    def specials(rng):
        pts = [np.array([0.0, 0.0, 1.0])]
        angles = rng.uniform(0.0, 2.0 * np.pi, size=32)
        for t in angles:
            pts.append(np.array([np.cos(t), np.sin(t), 0.0]))
        return np.array(pts)

    def proj(pts):
        pts = np.atleast_2d(pts)
        return pts[:, 2] ** 2

    return ActionModel(
        name="rp2-so2",
        group=g,
        manifold=m,
        amb=_embed_so2_in_3,
        amb_lie=_embed_so2_in_3,
        special_points=specials,
        ambient_pairs=(((0, 1), (1,)), ((2,), (0,))),
        interval=IntervalModel((0.0, 1.0), proj),
    )


def _make_cp2_so3() -> ActionModel:
    m = complex_projective(2)
    g = groups.so3()

    def amb(q):
        return np.kron(q, np.eye(2))

    def tx(x):
        t = np.zeros((6, 3, 3))
        for j in range(3):
            for c in range(2):
                t[2 * j + c, j, :] = x[c::2]
        return t

    def specials(rng):
        pts = []
        # real locus: genuinely real lines
        reals = [np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])]
        extra = rng.normal(size=(14, 3))
        reals.extend(v / np.linalg.norm(v) for v in extra)
        for v in reals:
            z = np.zeros(6)
            z[0::2] = v
            pts.append(z)
        # null quadric: [u + i w] with u, w orthonormal, scaled 1/sqrt(2)
        frames = [(np.eye(3)[:, 0], np.eye(3)[:, 1]), (np.eye(3)[:, 1], np.eye(3)[:, 2])]
        for _ in range(14):
            a_ = rng.normal(size=3)
            a_ /= np.linalg.norm(a_)
            b_ = rng.normal(size=3)
            b_ -= (b_ @ a_) * a_
            b_ /= np.linalg.norm(b_)
            frames.append((a_, b_))
        for u, w in frames:
            z = np.zeros(6)
            z[0::2] = u / np.sqrt(2.0)
            z[1::2] = w / np.sqrt(2.0)
            pts.append(z)
        return np.array(pts)

    def proj(pts):
        pts = np.atleast_2d(pts)
        xr = pts[:, 0::2]
        yi = pts[:, 1::2]
        cross = np.cross(xr, yi)
        return 1.0 - 4.0 * np.einsum("bi,bi->b", cross, cross)

    return ActionModel(
        name="cp2-so3",
        group=g,
        manifold=m,
        amb=amb,
        amb_lie=amb,
        special_points=specials,
        tx_tensor=tx,
        interval=IntervalModel((0.0, 1.0), proj),
    )


def _make_cp2_u1() -> ActionModel:
    m = complex_projective(2)
    g = groups.u1()

    def amb(q):
        out = np.zeros((6, 6))
        out[:2, :2] = np.eye(2)
        out[2:4, 2:4] = q
        out[4:, 4:] = q @ q
        return out

    def amb_lie(xi):
        out = np.zeros((6, 6))
        out[2:4, 2:4] = xi
        out[4:, 4:] = 2.0 * xi
        return out

    def specials(rng):
        pts = [np.zeros(6) for _ in range(3)]
        pts[0][0] = 1.0
        pts[1][2] = 1.0
        pts[2][4] = 1.0
        # the order-two locus away from the isolated fixed points: z1 = 0
        angles = rng.uniform(0.05, np.pi / 2 - 0.05, size=32)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=32)
        for t, ph in zip(angles, phases):
            z = np.zeros(6)
            z[0] = np.cos(t)
            z[4] = np.sin(t) * np.cos(ph)
            z[5] = np.sin(t) * np.sin(ph)
            pts.append(z)
        return np.array(pts)

    return ActionModel(
        name="cp2-u1",
        group=g,
        manifold=m,
        amb=amb,
        amb_lie=amb_lie,
        special_points=specials,
        ambient_pairs=(((0, 1), (0,)), ((2, 3), (1,)), ((4, 5), (2,))),
    )


def _make_s2_zn(n: int) -> ActionModel:
    if n < 2:
        raise InputError("s2-zn needs n >= 2")
    m = sphere(2)
    mats = []
    for j in range(n):
        t = 2.0 * np.pi * j / n
        mats.append(
            np.array(
                [[np.cos(t), -np.sin(t), 0.0], [np.sin(t), np.cos(t), 0.0], [0.0, 0.0, 1.0]]
            )
        )
    g = groups.finite(np.array(mats), name=f"Z_{n}")

    def specials(rng):
        del rng
        return np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])

    return ActionModel(
        name=f"s2-zn({n})",
        group=g,
        manifold=m,
        amb=lambda q: q,
        amb_lie=lambda xi: xi,
        special_points=specials,
        params={"n": n},
    )


def _make_cn_tn(n: int) -> ActionModel:
    if not 1 <= n <= 8:
        raise InputError("cn-tn supports 1 <= n <= 8")
    m = euclidean(2 * n)
    g = groups.torus(n)

    def specials(rng):
        pts = []
        for mask in range(1, 2**n):
            zero = [(mask >> i) & 1 for i in range(n)]
            if all(zero):
                pts.append(np.zeros(2 * n))
                continue
            for _ in range(12):
                z = np.empty(2 * n)
                mags = rng.uniform(0.4, 1.6, size=n)
                phs = rng.uniform(0.0, 2.0 * np.pi, size=n)
                for i in range(n):
                    if zero[i]:
                        z[2 * i] = 0.0
                        z[2 * i + 1] = 0.0
                    else:
                        z[2 * i] = mags[i] * np.cos(phs[i])
                        z[2 * i + 1] = mags[i] * np.sin(phs[i])
                pts.append(z)
        return np.array(pts)

    pairs = tuple(
        ((2 * i, 2 * i + 1), tuple(1 if j == i else 0 for j in range(n)))
        for i in range(n)
    )
    return ActionModel(
        name=f"cn-tn({n})",
        group=g,
        manifold=m,
        amb=lambda q: q,
        amb_lie=lambda xi: xi,
        special_points=specials,
        ambient_pairs=pairs,
        params={"n": n},
    )


_PARAM_RE = re.compile(r"^(s2-zn|cn-tn)\((\d+)\)$")


def get_action(action_id: str) -> ActionModel:
    """Resolve a catalog id, including the parametrized families."""
    fixed = {
        "s2xs2-so3": _make_s2xs2,
        "rp2-so2": _make_rp2,
        "cp2-so3": _make_cp2_so3,
        "cp2-u1": _make_cp2_u1,
    }
    if action_id in fixed:
        return fixed[action_id]()
    m = _PARAM_RE.match(action_id)
    if m:
        n = int(m.group(2))
        try:
            if m.group(1) == "s2-zn":
                return _make_s2_zn(n)
            return _make_cn_tn(n)
        except InputError as e:
            raise UnknownActionError(str(e)) from e
    raise UnknownActionError(f"no catalog action named {action_id!r}")


def catalog() -> list[ActionModel]:
    """The six named catalog actions with default parameters."""
    return [
        get_action("s2xs2-so3"),
        get_action("rp2-so2"),
        get_action("cp2-so3"),
        get_action("cp2-u1"),
        get_action("s2-zn(5)"),
        get_action("cn-tn(2)"),
    ]


def catalog_ids() -> list[str]:
    return [a.name for a in catalog()]


# ---------------------------------------------------------------------------
# point parsing (used by the command line)
# ---------------------------------------------------------------------------


def _parse_entry(token: str) -> complex:
    token = token.strip()
    if not token:
        raise PointSpecError("empty coordinate")
    try:
        return complex(float(token), 0.0)
    except ValueError:
        pass
    t = token.replace(" ", "")
    m = re.match(
        r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
        r"([+-](?:\d+(?:\.\d*)?|\.\d+)?(?:[eE][+-]?\d+)?)[ij]$",
        t,
    )
    if m:
        re_part = float(m.group(1))
        im_text = m.group(2)
        im_part = float(im_text) if im_text not in ("+", "-") else float(im_text + "1")
        return complex(re_part, im_part)
    m = re.match(r"^([+-]?(?:\d+(?:\.\d*)?|\.\d+)?(?:[eE][+-]?\d+)?)[ij]$", t)
    if m:
        text = m.group(1)
        if text in ("", "+", "-"):
            text += "1"
        return complex(0.0, float(text))
    raise PointSpecError(f"cannot parse coordinate {token!r}")


def parse_point(a: ActionModel, spec: str) -> np.ndarray:
    """Parse a comma-separated point specification into a representative.

    Real entries are plain floats; complex entries use the a+bi form. The
    parsed vector is normalized into a valid representative of the action's
    manifold.
    """
    entries = [_parse_entry(t) for t in spec.split(",")]
    m = a.manifold
    if m.kind == "complex_projective" or (m.kind == "euclidean" and m.ambient_dim % 2 == 0):
        want = m.ambient_dim // 2
        if len(entries) == want:
            vec = from_complex(np.array(entries, dtype=complex))
        elif len(entries) == m.ambient_dim and all(e.imag == 0.0 for e in entries):
            vec = np.array([e.real for e in entries])
        else:
            raise PointSpecError(
                f"expected {want} complex or {m.ambient_dim} real coordinates"
            )
    else:
        if any(e.imag != 0.0 for e in entries):
            raise PointSpecError("this manifold takes real coordinates")
        if len(entries) != m.ambient_dim:
            raise PointSpecError(f"expected {m.ambient_dim} coordinates")
        vec = np.array([e.real for e in entries])
    if m.kind != "euclidean" and np.linalg.norm(vec) < 1e-12:
        raise PointSpecError("zero vector does not represent a point")
    if m.kind == "product_spheres":
        d1 = m.factors[0]
        if np.linalg.norm(vec[:d1]) < 1e-12 or np.linalg.norm(vec[d1:]) < 1e-12:
            raise PointSpecError("each sphere factor needs a nonzero vector")
    return normalize(m, vec)
