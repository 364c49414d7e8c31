"""Closed-form key capacity and Gaussian information quantities."""

import numpy as np

from skreflect import ModelParams, build_conditional_covariance, gaussian_mi, sk_capacity_no_eve
from skreflect.gauss import gaussian_conditional_mi

# capacity without an eavesdropper rises with SNR and saturates at a level
# set by the channel correlation
for rho in (0.5, 0.9, 0.99):
    values = [sk_capacity_no_eve(ModelParams(10 ** (db / 10), rho_ab=rho)) for db in (0, 10, 20, 40)]
    limit = -0.5 * np.log2(1 - rho**2)
    print(f"rho_ab={rho}: " + "  ".join(f"{v:.3f}" for v in values) + f"  (limit {limit:.3f})")

# for one realisation of Eve's channels everything is a log-determinant
params = ModelParams.from_db(30.0, sigma2_e=1.0)
cov = build_conditional_covariance(params, h_ae=1.0, h_be=1.0)
eve = ["y_E3", "y_E4"]
print(f"I(y_A; y_B)            = {gaussian_mi(cov, ['y_A'], ['y_B']):.4f} bits")
print(f"I(y_A; y_E3, y_E4)     = {gaussian_mi(cov, ['y_A'], eve):.4f} bits")
print(f"I(y_A; y_B | y_E3,y_E4) = {gaussian_conditional_mi(cov, ['y_A'], ['y_B'], eve):.4f} bits")
