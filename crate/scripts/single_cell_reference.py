"""Single-cell reference values for the MRC/ZFC interference terms and utilities.

With one cell every propagation moment is 1, so both interference terms reduce
to scalar arithmetic. Computed with mpmath at 30 digits.
"""
from mpmath import mp, mpf, log

mp.dps = 30

M, B, S, L = mpf(100), mpf(10), mpf(400), mpf(1)
snr = mpf(10) ** (mpf(5) / 10)
K = B / L
eps = 1 / (B * snr)

i_mrc = (K + 1 / snr) * ((1 + eps) / M)
i_zfc = (K - K / (1 + eps) + 1 / snr) * ((1 + eps) / (M - K))

prelog = (1 - B / S) * K
for name, i in (("mrc", i_mrc), ("zfc", i_zfc)):
    u = prelog * log(1 + 1 / i, 2)
    print(f"{name}: interference={mp.nstr(i, 17)} utility={mp.nstr(u, 17)}")
