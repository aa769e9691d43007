"""Synthetic tables shared by the test modules."""
import numpy as np

from synthbal.data import Table


def near_duplicate_table(n_rows=400, n_base=100, n_dups=28, seed=0, noise=0.02):
    """Independent base columns plus ``n_dups`` noisy copies of some of them.

    Copies are spread through the column order so pruning has to look back
    across the whole kept set.
    """
    rng = np.random.default_rng(seed)
    base = rng.standard_normal((n_rows, n_base))
    sources = rng.choice(n_base, size=n_dups, replace=False)
    dups = base[:, sources] + noise * rng.standard_normal((n_rows, n_dups))
    x = np.hstack([base, dups])
    # sort key places every copy somewhere after its source column
    keys = np.concatenate([np.arange(n_base), rng.uniform(sources + 0.5, n_base)])
    cols = np.argsort(keys, kind="stable")
    x = x[:, cols]
    names = tuple(f"f{j:03d}" for j in range(x.shape[1]))
    labels = rng.integers(0, 2, n_rows)
    return Table(names, x, labels), int(n_base)


def planted_table(n_major=3000, n_minor=1465, n_cols=128, n_dups=28, seed=0,
                  n_latent=6, n_clusters=24, noise=0.3, spread=1.6, width=0.4):
    """Imbalanced table driven by a few latent factors, minority in small clusters.

    Columns are random mixtures of ``n_latent`` factors plus independent
    noise, then ``n_dups`` near-copies are appended. Majority factors are
    standard normal; minority factors come from tight clusters inside that
    cloud, so a learner fitted on the raw class ratio under-calls the
    minority and oversampling helps recall.
    """
    rng = np.random.default_rng(seed)
    n_base = n_cols - n_dups
    centers = rng.normal(0.0, spread, (n_clusters, n_latent))
    z_major = rng.standard_normal((n_major, n_latent))
    which = rng.integers(0, n_clusters, n_minor)
    z_minor = centers[which] + width * rng.standard_normal((n_minor, n_latent))
    loadings = rng.standard_normal((n_latent, n_base)) / np.sqrt(n_latent)
    z = np.vstack([z_major, z_minor])
    x = z @ loadings + noise * rng.standard_normal((z.shape[0], n_base))
    sources = rng.choice(n_base, size=n_dups, replace=False)
    dups = x[:, sources] + 0.02 * rng.standard_normal((x.shape[0], n_dups))
    x = np.hstack([x, dups])
    y = np.concatenate([np.zeros(n_major, np.int64), np.ones(n_minor, np.int64)])
    perm = rng.permutation(x.shape[0])
    names = tuple(f"f{j:03d}" for j in range(x.shape[1]))
    return Table(names, x[perm], y[perm])


def has_witness_segment(point, minority, tol=1e-9):
    """Exhaustive check: does ``point`` lie on a segment between two minority rows?

    Every ordered pair (a, b) is tried at once; the interpolation weight is
    the projection of ``point - a`` on ``b - a`` and the residual must vanish.
    Identical pairs reduce to a point-equality test.
    """
    minority = np.asarray(minority, dtype=float)
    a = minority[:, None, :]
    d = minority[None, :, :] - a
    dd = np.einsum("ijk,ijk->ij", d, d)
    u = np.einsum("ijk,ijk->ij", point - a, d) / np.where(dd > 0, dd, 1.0)
    u = np.where(dd > 0, u, 0.0)
    close = np.abs(a + u[..., None] * d - point) <= tol * (1 + np.abs(point))
    ok = close.all(axis=2) & (u >= -tol) & (u <= 1 + tol)
    return bool(ok.any())
