"""Fitting mixtures by EM and reading the convergence diagnostics."""

import numpy as np

from rblab import FitConfig, GaussianComponent, Gmm, fit_gmm, responsibilities

true_model = Gmm([
    GaussianComponent(0.4, np.array([-4.0, 0.0]), np.eye(2)),
    GaussianComponent(0.6, np.array([4.0, 2.0]), 0.5 * np.eye(2)),
])
data = true_model.sample(2000, seed=7)

fitted = fit_gmm(data, FitConfig(n_components=2, seed=1))
print("converged:", fitted.converged, "after", fitted.n_iter, "iterations")
print("winning restart:", fitted.restart_index)
print("mean log-likelihood:", fitted.final_log_likelihood)
print("recovered means:\n", np.sort(fitted.model.means, axis=0))

# the trace is nondecreasing: every EM step improves the fit
trace = np.array(fitted.log_likelihood_trace)
print("monotone trace:", bool(np.all(np.diff(trace) >= -1e-9)))

# posterior memberships for the first few points
post = responsibilities(fitted.model, data)
print("first responsibilities:\n", post[:3].round(4))
