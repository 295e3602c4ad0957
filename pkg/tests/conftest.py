import math

import pytest

from hybridnet import (
    EdgeLog,
    EdgeRecord,
    HybridParams,
    NetworkState,
    SimulationConfig,
    simulate,
    step_distribution,
)


@pytest.fixture
def table1_params():
    return HybridParams.fill_gamma(0.1, 0.8, p=0.8, delta_in=1.3, delta_out=0.7)


def state_from_records(records):
    """Build a NetworkState by replaying plain (source, target) pairs from the seed."""
    in_deg = {1: 1}
    out_deg = {1: 1}
    created = {1: 0}
    for k, (src, tgt) in enumerate(records, start=1):
        for node in (src, tgt):
            if node not in in_deg:
                in_deg[node] = 0
                out_deg[node] = 0
                created[node] = k
        in_deg[tgt] += 1
        out_deg[src] += 1
    n = len(in_deg)
    return NetworkState(
        node_count=n,
        step=len(records),
        in_degree=[in_deg[i] for i in range(1, n + 1)],
        out_degree=[out_deg[i] for i in range(1, n + 1)],
        creation_step=[created[i] for i in range(1, n + 1)],
    )


def log_from_pairs(pairs, scenarios=None):
    scenarios = scenarios or [None] * len(pairs)
    return EdgeLog(
        [EdgeRecord(s, t, k, sc) for k, ((s, t), sc) in enumerate(zip(pairs, scenarios), start=1)]
    )


def small_simulated_state(params, n_edges, seed):
    state, log, _ = simulate(SimulationConfig(params=params, n_edges=n_edges, seed=seed))
    return state, log


def enumerate_histories(params, length):
    """All (records, probability) pairs of the given length starting from the seed."""
    out = []

    def recurse(records, prob):
        if len(records) == length:
            out.append((list(records), prob))
            return
        state = state_from_records(records)
        for (sc, src, tgt), mass in step_distribution(state, params).items():
            records.append((src, tgt))
            recurse(records, prob * mass)
            records.pop()

    recurse([], 1.0)
    total = sum(p for _, p in out)
    assert math.isfinite(total)
    return out
