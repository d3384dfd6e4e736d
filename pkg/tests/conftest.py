"""Shared independent oracles for the test suite.

These deliberately avoid the library's own quadrature/closed forms wherever
they are used to judge it: entropies and information rates are re-estimated
by plain Monte Carlo against the analytic densities, and the Gaussian
mismatch value comes from a conjugate-prior derivation done here from
scratch.
"""

import numpy as np

from ctdi.core import FinitePmf
from ctdi.poisson import interarrival_density, mean_inverse_intensity


def plugin_rate_oracle(pmf, n_samples, seed):
    """I(X;Y)/E[1/X] by sampling one event: I = E[ln f(Y|X) - ln f(Y)]."""
    gen = np.random.default_rng(seed)
    x = gen.choice(pmf.support, p=pmf.probs, size=n_samples)
    y = gen.exponential(1.0 / x)
    ll = np.log(x) - x * y - np.log(interarrival_density(pmf, y))
    return float(ll.mean()) / mean_inverse_intensity(pmf)


def mc_entropy_oracle(pmf, n_samples, seed):
    """h(Y) as -mean ln f(Y) over exact draws from the interarrival law."""
    gen = np.random.default_rng(seed)
    x = gen.choice(pmf.support, p=pmf.probs, size=n_samples)
    y = gen.exponential(1.0 / x)
    vals = -np.log(interarrival_density(pmf, y))
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n_samples))


def quantized_normal_prior(n_atoms=101, span=5.0):
    """Standard normal discretized to a uniform atom grid on [-span, span]."""
    atoms = np.linspace(-span, span, n_atoms)
    w = np.exp(-0.5 * atoms * atoms)
    return FinitePmf(atoms, w / w.sum())


def gaussian_mismatch_closed_form(horizon, q_var):
    """Relative entropy between output laws for constant-signal priors.

    True prior N(0,1), mismatched prior N(0, q_var).  The output law given
    the prior variance v has log-density (vs the noise-only law) equal to
    -ln(1+vT)/2 + v Y_T^2 / (2(1+vT)), and E[Y_T^2] = T + T^2 under the
    true prior; taking the expectation of the log-ratio gives the value.
    """
    t = float(horizon)
    return (
        -0.5 * np.log1p(t)
        + 0.5 * t
        + 0.5 * np.log1p(q_var * t)
        - q_var * t * (1 + t) / (2 * (1 + q_var * t))
    )


def random_positive_pmf(gen, max_atoms=3, lo=0.5, hi=3.0):
    """Random finite intensity law with distinct positive support."""
    k = int(gen.integers(2, max_atoms + 1))
    while True:
        support = np.round(gen.uniform(lo, hi, size=k), 6)
        if np.unique(support).size == k:
            break
    probs = gen.dirichlet(np.ones(k))
    return FinitePmf(support, probs)
