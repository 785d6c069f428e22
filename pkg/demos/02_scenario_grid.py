"""Reproduce a conditional-wait comparison grid.

For a set of arrival snapshots, compare the analytic decomposition against
the discrete-event simulation across all four server-position scenarios and
report the relative gap, the quantity the method is judged on.
"""

from tandempoll import (
    ArrivalState,
    SimConfig,
    SystemParams,
    analyze,
    simulate_conditional,
    validate_params,
)

params = validate_params(SystemParams(lam=(1.0, 1.0), mu=((2.86, 2.86), (2.86, 2.86))))
cases = [(1, 1, 1, 1), (3, 3, 3, 3), (6, 6, 6, 6), (1, 1, 6, 6), (6, 6, 1, 1)]
cfg = SimConfig(replications=800, seed=42)

print(f"{'L^a':<14}" + "".join(f"   m={m}: anl/sim (gap) " for m in (1, 2, 3, 4)))
gaps = []
for la in cases:
    cells = []
    for m in (1, 2, 3, 4):
        s = ArrivalState(la=la, m=m)
        a = analyze(s, params).cond_wait
        sim = simulate_conditional(s, params, cfg).mean
        gap = abs(sim - a) / sim * 100
        gaps.append(gap)
        cells.append(f"{a:5.2f}/{sim:5.2f} ({gap:4.1f}%)")
    print(f"{str(la):<14}" + "  ".join(cells))
print(f"\naverage gap: {sum(gaps) / len(gaps):.2f}%")
