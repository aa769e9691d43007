"""Central finite-difference oracle for the hand-written network gradients."""
import numpy as np

from synthbal.tabgan import init_mlp, mlp_forward
from synthbal.tabgan.gan import discriminator_loss_and_grads, generator_loss_and_grads

H = 1e-5


def rel_error(analytic, numeric):
    a, n = np.asarray(analytic), np.asarray(numeric)
    return float(np.max(np.abs(a - n) / np.maximum(np.abs(a) + np.abs(n), 1e-7)))


def numeric_grads(loss_of_arrays, arrays, h=H):
    """d loss / d every entry of every array, by central differences."""
    out = []
    for i, a in enumerate(arrays):
        g = np.zeros_like(a)
        for idx in np.ndindex(a.shape):
            bumped = [x.copy() for x in arrays]
            bumped[i][idx] += h
            up = loss_of_arrays(bumped)
            bumped[i][idx] -= 2 * h
            down = loss_of_arrays(bumped)
            g[idx] = (up - down) / (2 * h)
        out.append(g)
    return out


def random_pair(rng):
    """Small generator/discriminator pair plus matching data batches."""
    width = int(rng.integers(1, 4))
    noise_dim = int(rng.integers(1, 5))
    g_hidden = [int(w) for w in rng.integers(2, 6, rng.integers(1, 3))]
    d_hidden = [int(w) for w in rng.integers(2, 6, rng.integers(1, 3))]
    gen = init_mlp([noise_dim, *g_hidden, width], "relu", "linear", rng)
    disc = init_mlp([width, *d_hidden, 1], "leaky_relu", "sigmoid", rng)
    n = int(rng.integers(2, 6))
    real = rng.standard_normal((n, width))
    fake = rng.standard_normal((n, width))
    noise = rng.standard_normal((n, noise_dim))
    return gen, disc, real, fake, noise


def check_network(rng) -> dict:
    """Max relative errors for output, discriminator and generator gradients."""
    from synthbal.tabgan import mlp_backward

    gen, disc, real, fake, noise = random_pair(rng)
    errors = {}

    # arbitrary linear functional of the generator output
    weights = rng.standard_normal((noise.shape[0], gen.out_width))
    out, cache = mlp_forward(gen, noise)
    analytic, input_grad = mlp_backward(gen, cache, weights)
    numeric = numeric_grads(
        lambda arrs: float(np.sum(mlp_forward(gen.with_arrays(arrs), noise)[0] * weights)),
        gen.arrays(),
    )
    errors["output"] = max(rel_error(a, n) for a, n in zip(analytic, numeric))
    num_in = numeric_grads(lambda arrs: float(np.sum(mlp_forward(gen, arrs[0])[0] * weights)), [noise])[0]
    errors["input"] = rel_error(input_grad, num_in)

    _, analytic = discriminator_loss_and_grads(disc, real, fake)
    numeric = numeric_grads(
        lambda arrs: discriminator_loss_and_grads(disc.with_arrays(arrs), real, fake)[0],
        disc.arrays(),
    )
    errors["discriminator"] = max(rel_error(a, n) for a, n in zip(analytic, numeric))

    _, analytic = generator_loss_and_grads(gen, disc, noise)
    numeric = numeric_grads(
        lambda arrs: generator_loss_and_grads(gen.with_arrays(arrs), disc, noise)[0],
        gen.arrays(),
    )
    errors["generator"] = max(rel_error(a, n) for a, n in zip(analytic, numeric))
    return errors
