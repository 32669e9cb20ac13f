"""What each prior family does when the conflict becomes extreme.

Two ways a located, scaled prior can disagree with the data: its location
drifts away (mu -> infinity), or it concentrates hard on the wrong place
(lam -> infinity).  The fate of the conflict is read off the ratio of the
scaled prior density to a fixed normalizer:

* Student, drifting location: ratio -> (sigma/lam)^gamma, a partial
  resolution with a scale-dependent trace;
* LPTN, drifting location: ratio -> 1, whole robustness;
* LPTN, exploding scaling: collapses like 1/|beta - mu| at a painfully
  slow log rate (the companion column);
* CTN, either conflict: the ratio hits 1 exactly at a finite threshold.

Run:  python demos/02_conflict_asymptotics.py
"""

from robustpriors import (lptn_scaling_trace, prior_limit_ctn,
                          prior_ratio_lptn, prior_ratio_student)

print("Student location drift (lam=2, sigma=1, gamma=4): limit (1/2)^4")
s = prior_ratio_student(2.0, 1.0, 1.0, 4.0)
for w, r in zip(s.omega, s.ratio):
    print(f"  mu = {w:10.0f}   ratio = {r:.6f}   (target {s.target:.6f})")

print("\nLPTN location drift (lam=1, sigma=1, rho=0.95): limit 1")
s = prior_ratio_lptn(1.0, 1.0, 1.0, 0.95)
for w, r in zip(s.omega, s.ratio):
    print(f"  mu = {w:10.0f}   ratio = {r:.6f}")

print("\nLPTN scaling collapse at |beta - mu| = 0.5: companion -> 1, slowly")
tr = lptn_scaling_trace(0.5, 0.0, 1.0, 0.95)
for lam, dens, comp in zip(tr.lam, tr.density, tr.companion.ratio):
    print(f"  lam = {lam:8.0e}   density = {dens:.3e}   "
          f"companion = {comp:.4f}")

print("\nCTN: the limit is attained exactly once the offset passes kappa")
s = prior_limit_ctn(0.0, 0.98, "scaling", mu=0.5, grid=[1.0, 3.0, 5.0, 50.0])
for lam, r in zip(s.omega, s.ratio):
    inside = lam * 0.5 <= 2.3263
    note = "inside matching interval" if inside else "constant tail: exact"
    print(f"  lam = {lam:6.1f}   ratio = {r:.6f}   ({note})")
