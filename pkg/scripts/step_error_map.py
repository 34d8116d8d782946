"""Step approximation of Si(n pi + a) - Si(n pi - a) against the exact difference.

Prints the error around the special index k = floor(a/pi) for several a.
"""

import numpy as np

from maxdaemon import greens as gr

for f in (10.05, 10.3, 10.5, 10.95, 20.3, 40.7):
    a = f * np.pi
    k = int(f)
    row = []
    for n in range(max(1, k - 3), k + 4):
        row.append(f"n={n}:{abs(gr.si_step_approx(n, a) - gr.si_difference(n, a)):.3f}")
    far = max(abs(gr.si_step_approx(n, a) - gr.si_difference(n, a)) for n in range(1, 4 * k) if abs(n - k) > 10)
    print(f"a={f:5.2f}pi  " + " ".join(row) + f"  max|n-k|>10: {far:.4f}")
