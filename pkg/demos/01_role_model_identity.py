"""Why a misfit post-processor can only under-report information.

Builds a tiny discrete channel over GF(4), keeps only the ranked list
Z = rank of P(x | y), and compares three numbers computed exactly:
I(X;Y), I(X;Z) and the mixed information of a deliberately poor model
Q(x | z). The divergence identity is printed term by term.

    python3 demos/01_role_model_identity.py
"""

import numpy as np

from rankexit.infomeasure import DiscreteJoint, exact_mi, exact_mixed_info, exact_role_model_audit
from rankexit.rolemodel import RankPositionModel

rng = np.random.default_rng(2024)

# A random 4-input, 16-output channel with a uniform prior.
w = rng.dirichlet(np.full(16, 0.4), size=4)
joint = DiscreteJoint.from_channel(w)
ranks, post_z = joint.posterior_given_z()
print(f"{len(ranks)} distinct ranked lists out of 24 possible")

i_xy = exact_mi(joint, "XY")
i_xz = exact_mi(joint, "XZ")

# Q that trusts the top of the list far too much.
overconfident = RankPositionModel([0.97, 0.01, 0.01, 0.01])
# Q that is the exact conditional P(x | z).
_, labels = joint.z_labels()
exact_q = post_z[labels]

print(f"I(X;Y)                    = {i_xy:.6f} bits")
print(f"I(X;Z)                    = {i_xz:.6f} bits")
print(f"mixed info, exact Q       = {exact_mixed_info(joint, exact_q):.6f} bits")
print(f"mixed info, overconfident = {exact_mixed_info(joint, overconfident):.6f} bits")

a = exact_role_model_audit(joint, overconfident)
print("\nE D(P_X|Y || Q)           =", f"{a['lhs']:.6f}")
print("H(X|Z) - H(X|Y)           =", f"{a['h_x_given_z'] - a['h_x_given_y']:.6f}")
print("E D(P_X|Z || Q)           =", f"{a['residual_divergence']:.6f}")
print("identity residual         =", f"{a['lhs'] - (a['h_x_given_z'] - a['h_x_given_y'] + a['residual_divergence']):.2e}")
