"""
How conservative is the LMI certificate?
========================================

For the rotation-coupled chain the LMI reduces to a scalar Riccati equation
``s^2 - 4 s + 16 r^2 + eps = 0``. A certificate exists only while its
discriminant is positive, i.e. for ``r < sqrt(4 - eps) / 4``, even though
the chain is stable for every ``r``.
"""

import numpy as np

from qsnet.errors import NoCertificateFound
from qsnet.lmi import find_certificate, verify_certificate
from qsnet.model import build_blocks, canonical_spec
from qsnet.spectral import stability_sweep

eps = 0.1
print(f"threshold r* = {np.sqrt(4 - eps) / 4:.4f}")
print(" r      sweep    certificate   s (Newton)   s (closed form)")
for r in np.arange(0.05, 0.75, 0.05):
    spec = canonical_spec(N=8, d=1, R=[np.zeros((2, 2)), r * np.eye(2)], M=np.eye(2))
    blocks = build_blocks(spec)
    stable = stability_sweep(blocks, 256).stable
    disc = 4 - 16 * r**2 - eps
    exact = 2 - np.sqrt(disc) if disc >= 0 else np.nan
    try:
        cert = find_certificate(blocks, eps)
        ok, slack = verify_certificate(blocks, cert.S, cert.Q)
        s = cert.S[0, 0]
        found = f"yes ({cert.iterations} it)"
    except NoCertificateFound:
        s, found = np.nan, "no"
    print(f"{r:4.2f}   {str(stable):6s}   {found:12s}  {s:10.6f}   {exact:10.6f}")
