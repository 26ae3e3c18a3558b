#!/usr/bin/env python3
"""Generates the hand-arithmetic table embedded in the acceptance suite
(privacy-transform cases), using mpmath at 30 digits so the Rust values
are checked against an independent calculation."""
import mpmath as mp

mp.mp.dps = 30

cases = []
# pure: (eps, alpha) -> 2*alpha*eps
for eps, alpha in [("0.1", "1.2"), ("0.5", "2"), ("1", "2"), ("2", "4"),
                   ("0.25", "10"), ("1.5", "1.5"), ("0.75", "3"), ("0.01", "2")]:
    e, a = mp.mpf(eps), mp.mpf(alpha)
    cases.append(("pure", eps, "0", alpha, 2 * a * e, mp.mpf(0)))
# approx: (eps, delta, alpha) -> (2*alpha*eps, 2*delta), needs 2*delta < 1
for eps, delta, alpha in [("0.5", "1e-6", "2"), ("1", "0.01", "2"),
                          ("0.3", "0.2", "1.5"), ("2", "1e-3", "1.2"),
                          ("0.05", "0.4", "2"), ("0.8", "1e-8", "6")]:
    e, d, a = mp.mpf(eps), mp.mpf(delta), mp.mpf(alpha)
    cases.append(("approx", eps, delta, alpha, 2 * a * e, 2 * d))
# metric: (eps_metric, alpha) -> 2*alpha*eps_metric
for eps, alpha in [("0.1", "2"), ("1", "1.2"), ("0.5", "4"),
                   ("3", "2"), ("0.02", "8"), ("0.7", "2.5")]:
    e, a = mp.mpf(eps), mp.mpf(alpha)
    cases.append(("metric", eps, "0", alpha, 2 * a * e, mp.mpf(0)))

assert len(cases) == 20
for kind, eps, delta, alpha, out_e, out_d in cases:
    print(f'("{kind}", {eps}, {delta}, {alpha}, {mp.nstr(out_e, 20)}, {mp.nstr(out_d, 20)}),')

print()
print("alpha_max identity e^{-4.2}/(3 ln 3) + 1 =",
      mp.nstr(mp.e**mp.mpf("-4.2") / (3 * mp.log(3)) + 1, 25))
