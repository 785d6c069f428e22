"""Walk through one snapshot: what does an arriving customer actually wait?

A class-1 customer arrives and sees three customers of each class at
station 1, three of each at station 2, with both servers busy on class 1
(scenario m = 1).  We compute the mean conditional wait three ways and show
the sub-scenario breakdown behind the analytic number.
"""

from tandempoll import (
    ArrivalState,
    SimConfig,
    SystemParams,
    analyze,
    deterministic_wait,
    simulate_conditional,
    validate_params,
)

params = validate_params(SystemParams(lam=(1.0, 1.0), mu=((2.86, 2.86), (2.86, 2.86))))
snapshot = ArrivalState(la=(3, 3, 3, 3), m=1)

report = analyze(snapshot, params)
print(f"analytic conditional wait : {report.cond_wait:.3f}")
print(f"unexplored tree mass      : {report.residual_prob:.2e}")
print("sub-scenario breakdown (prob, mean wait):")
for leaf in sorted(report.outcomes, key=lambda o: -o.prob):
    if leaf.prob > 1e-4:
        print(f"  {leaf.label:<28s} {leaf.prob:8.5f}  {leaf.wait:7.3f}")

est = simulate_conditional(snapshot, params, SimConfig(replications=4000, seed=7))
print(f"\nsimulated (4000 reps)     : {est.mean:.3f} +/- {est.stderr:.3f}")

det_params = SystemParams(lam=(1.0, 1.0), mu=((1 / 0.35, 1 / 0.35), (1 / 0.35, 1 / 0.35)))
print(f"deterministic timeline    : {deterministic_wait(snapshot, det_params):.3f}")
