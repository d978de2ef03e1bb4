"""Brute-force oracles for small MDPs: dynamic programming and empirical
Markov-chain models built directly from datasets.

Nothing in here touches the learning code; these functions exist so tests
can check learned quantities against independently computed references.
"""

from __future__ import annotations

import numpy as np


def value_iteration(P, R, gamma, terminal, tol=1e-12, max_iters=100000):
    """Optimal values/Q for a finite MDP.

    P: (n, m, n) transition tensor, R: (n, m) expected immediate reward,
    terminal: (n,) bool mask of absorbing states whose value is fixed at 0.
    Returns (v, q).
    """
    P = np.asarray(P, dtype=np.float64)
    R = np.asarray(R, dtype=np.float64)
    n, m, _ = P.shape
    v = np.zeros(n)
    for _ in range(max_iters):
        q = R + gamma * (P @ v)
        v_new = q.max(axis=1)
        v_new[terminal] = 0.0
        if np.max(np.abs(v_new - v)) < tol:
            v = v_new
            break
        v = v_new
    q = R + gamma * (P @ v)
    q[terminal] = 0.0
    return v, q


def policy_evaluation(P_pi, R_pi, gamma, terminal):
    """Exact v for a Markov chain P_pi (n, n) with rewards R_pi (n,).

    Solves (I - gamma * P) v = R with terminal rows zeroed out.
    """
    P = np.asarray(P_pi, dtype=np.float64).copy()
    R = np.asarray(R_pi, dtype=np.float64).copy()
    P[terminal] = 0.0
    R[terminal] = 0.0
    n = len(R)
    return np.linalg.solve(np.eye(n) - gamma * P, R)


def finite_horizon_success(P_pi, goal_idx, horizon, start_dist):
    """Probability of hitting goal_idx within `horizon` steps of the chain."""
    P = np.asarray(P_pi, dtype=np.float64)
    n = P.shape[0]
    u = np.zeros(n)
    hit = P[:, goal_idx].copy()
    for _ in range(horizon):
        cont = P.copy()
        cont[:, goal_idx] = 0.0
        u = hit + cont @ u
    u[goal_idx] = 1.0
    return float(np.asarray(start_dist) @ u)


class EmpiricalMixtureChain:
    """Markov chain over observed states induced by mixture sampling.

    Built from expert and background transition lists: each expert
    transition carries weight (1 - alpha) / N_E, each background transition
    alpha / N_B, mirroring a sampler that picks the origin first and then a
    transition uniformly. Provides the conditional next-state kernel, the
    expert-origin probability of arrivals, and terminal bookkeeping.
    """

    def __init__(self, expert_pairs, background_pairs, alpha):
        # pairs are (s_key, s_next_key, is_terminal) tuples of hashables
        w_e = (1.0 - alpha) / len(expert_pairs)
        w_b = alpha / len(background_pairs)
        pair_w: dict = {}
        pair_we: dict = {}
        pair_term: dict = {}
        keys = set()
        for pairs, w, is_expert in ((expert_pairs, w_e, True),
                                    (background_pairs, w_b, False)):
            for s, s2, term in pairs:
                k = (s, s2)
                pair_w[k] = pair_w.get(k, 0.0) + w
                if is_expert:
                    pair_we[k] = pair_we.get(k, 0.0) + w
                prev = pair_term.setdefault(k, bool(term))
                if prev != bool(term):
                    raise ValueError(f"pair {k} is inconsistently terminal")
                keys.add(s)
                keys.add(s2)
        self.states = sorted(keys)
        self.index = {s: i for i, s in enumerate(self.states)}
        n = len(self.states)
        self.n = n
        W = np.zeros((n, n))
        WE = np.zeros((n, n))
        T = np.zeros((n, n), dtype=bool)
        for (s, s2), w in pair_w.items():
            i, j = self.index[s], self.index[s2]
            W[i, j] = w
            WE[i, j] = pair_we.get((s, s2), 0.0)
            T[i, j] = pair_term[(s, s2)]
        self.weight = W
        self.weight_expert = WE
        self.terminal_pair = T
        out = W.sum(axis=1)
        self.has_outgoing = out > 0.0
        self.kernel = np.zeros((n, n))
        self.kernel[self.has_outgoing] = W[self.has_outgoing] / out[self.has_outgoing, None]
        # arrival-conditioned expert probability p(z = E | s')
        arrive = W.sum(axis=0)
        arrive_e = WE.sum(axis=0)
        self.p_expert_arrival = np.zeros(n)
        nz = arrive > 0.0
        self.p_expert_arrival[nz] = arrive_e[nz] / arrive[nz]
        # pair-conditioned expert probability p(z = E | s, s')
        self.p_expert_pair = np.zeros((n, n))
        nzp = W > 0.0
        self.p_expert_pair[nzp] = WE[nzp] / W[nzp]

    def dp_value(self, gamma, reward="arrival", tol=1e-13, max_iters=2000000):
        """Fixed point of the TD backup on the chain.

        v(s) = sum_{s'} P(s'|s) * ( p/(1-gamma)        if the pair is terminal
                                    p + gamma * v(s')  otherwise )
        with p the expert-origin probability of the transition, taken either
        arrival-conditioned p(z=E|s') or pair-conditioned p(z=E|s,s').
        States without outgoing transitions get value 0 and are excluded
        from comparisons by callers (see has_outgoing).
        """
        if reward == "arrival":
            Rp = np.broadcast_to(self.p_expert_arrival, (self.n, self.n))
        elif reward == "pair":
            Rp = self.p_expert_pair
        else:
            raise ValueError("reward must be 'arrival' or 'pair'")
        K = self.kernel
        term = self.terminal_pair
        # per-state immediate payout and continuation kernel
        imm = (K * np.where(term, Rp / (1.0 - gamma), Rp)).sum(axis=1)
        cont = np.where(term, 0.0, K)
        v = np.zeros(self.n)
        for _ in range(max_iters):
            v_new = imm + gamma * (cont @ v)
            if np.max(np.abs(v_new - v)) < tol:
                return v_new
            v = v_new
        return v

    def mc_value(self, start_key, gamma, n_rollouts, rng, reward="arrival",
                 horizon=2000):
        """Monte-Carlo estimates of the same fixed point by chain simulation.

        Returns (mean, standard_error) over n_rollouts independent chains.
        """
        i0 = self.index[start_key]
        n = self.n
        K = self.kernel
        cum = np.cumsum(K, axis=1)
        totals = np.empty(n_rollouts)
        for r in range(n_rollouts):
            total = 0.0
            disc = 1.0
            i = i0
            for _ in range(horizon):
                j = int(np.searchsorted(cum[i], rng.random(), side="right"))
                j = min(j, n - 1)
                if reward == "arrival":
                    p = self.p_expert_arrival[j]
                else:
                    p = self.p_expert_pair[i, j]
                if self.terminal_pair[i, j]:
                    total += disc * p / (1.0 - gamma)
                    break
                total += disc * p
                disc *= gamma
                i = j
                if not self.has_outgoing[i]:
                    break
            totals[r] = total
        se = float(totals.std(ddof=1) / np.sqrt(n_rollouts)) if n_rollouts > 1 else 0.0
        return float(totals.mean()), se


def gridworld_pairs(dataset, env):
    """Dataset transitions as integer-keyed pairs for the mixture chain."""
    pairs = []
    for tr in dataset.trajectories:
        last = len(tr.states) - 2
        for i in range(len(tr.states) - 1):
            pairs.append((env.state_index(tr.states[i]),
                          env.state_index(tr.states[i + 1]),
                          tr.terminated and i == last))
    return pairs
