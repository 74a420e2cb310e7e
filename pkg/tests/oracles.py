"""Independent reference computations used to freeze expected values.

Nothing here imports the code paths it checks.
"""

import numpy as np


def brake_to_stop_final_clearance(gap, v_ego, v_lead, t_dr, a_ego, a_lead, dt=1e-3):
    """Time-step both vehicles to rest and return the final bumper clearance.

    Lead brakes at a_lead immediately; ego holds v_ego for t_dr, then brakes at
    a_ego. Speeds are stepped with dv = -a*dt and positions with the
    trapezoid rule.
    """
    t_end = t_dr + v_ego / a_ego + v_lead / a_lead + 1.0
    n = int(np.ceil(t_end / dt)) + 1
    k = np.arange(n)

    lead_v = np.maximum(0.0, v_lead - a_lead * dt * k)
    braking_steps = np.maximum(0, k - int(round(t_dr / dt)))
    ego_v = np.maximum(0.0, v_ego - a_ego * dt * braking_steps)

    lead_d = np.sum(0.5 * (lead_v[1:] + lead_v[:-1]) * dt)
    ego_d = np.sum(0.5 * (ego_v[1:] + ego_v[:-1]) * dt)
    return gap + lead_d - ego_d


def bisect_zero_clearance_gap(v_ego, v_lead, t_dr, a_ego, a_lead, dt=1e-3, iters=60):
    """Smallest initial gap (>= 0) at which the brake-to-stop rollout ends with zero clearance."""
    sim = lambda g: brake_to_stop_final_clearance(g, v_ego, v_lead, t_dr, a_ego, a_lead, dt)
    lo, hi = 0.0, 1.0
    if sim(lo) >= 0:
        return 0.0
    while sim(hi) < 0:
        hi *= 2
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if sim(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def brute_force_perceived(xs, speeds, attended, dt):
    """Step-by-step perceived longitudinal position/speed for a straight +x lead.

    Walks forward keeping the last attended state and dead-reckoning from it.
    """
    px, pv = [], []
    anchor_x, anchor_v, anchor_i = xs[0], speeds[0], 0
    for i in range(len(xs)):
        if attended[i] or i == 0:
            anchor_x, anchor_v, anchor_i = xs[i], speeds[i], i
            px.append(xs[i])
            pv.append(speeds[i])
        else:
            px.append(anchor_x + anchor_v * (i - anchor_i) * dt)
            pv.append(anchor_v)
    return np.array(px), np.array(pv)
