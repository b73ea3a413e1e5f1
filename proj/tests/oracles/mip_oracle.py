#!/usr/bin/env python3
"""Brute-force oracle for tiny service-planning instances.

Builds the time-expanded graph from the instance definition on its own, then solves
the integer multicommodity flow program for every admissible service vector with
scipy's MILP solver. Writes tests/fixtures/mip_oracle.json.

usage: mip_oracle.py [--count 25] [--seed 2024] [--out PATH]
"""
import argparse
import itertools
import json
import math
import pathlib
import random

import numpy as np
from scipy.optimize import LinearConstraint, Bounds, milp
from scipy.sparse import lil_matrix


def random_instance(rng, name):
    n_st = rng.randint(3, 4)
    stations = [{"id": f"S{i}", "x": 1000.0 * i, "y": 0.0, "platform_capacity": 200} for i in range(n_st)]
    n_lines = rng.randint(1, 2)
    lines = []
    for l in range(n_lines):
        length = rng.randint(2, n_st)
        first = rng.randint(0, n_st - length)
        seq = [f"S{i}" for i in range(first, first + length)]
        if rng.random() < 0.4:
            seq.reverse()
        lines.append({
            "id": f"L{l}", "mode": "train" if l == 0 or rng.random() < 0.5 else "bus",
            "stations": seq, "runtimes": [rng.randint(1, 3) for _ in range(length - 1)],
            "capacity": rng.choice([20, 40, 60]), "headway": rng.randint(1, 3),
        })
    horizon = rng.randint(8, 12)
    candidates = [lines[1]["id"]] if n_lines == 2 and rng.random() < 0.5 else []
    served = sorted({s for l in lines for s in l["stations"]})
    commodities = []
    for p in range(rng.randint(1, 4)):
        if rng.random() < 0.8:
            seq = rng.choice(lines)["stations"]
            i, j = sorted(rng.sample(range(len(seq)), 2))
            o, d = seq[i], seq[j]
        else:
            o, d = rng.sample(served, 2)
        commodities.append({"id": f"p{p}", "origin": o, "destination": d,
                            "start": rng.randint(0, 3), "demand": rng.randint(5, 40)})
    incidents = []
    if rng.random() < 0.4:
        l0 = lines[0]["stations"]
        i = rng.randint(0, len(l0) - 2)
        start = rng.randint(0, horizon - 2)
        incidents.append({"segment": [l0[i], l0[i + 1]], "directions": "both",
                          "start": start, "end": rng.randint(start + 1, horizon)})
    existing = [1, 2] if rng.random() < 0.5 else [1, 2, 3]
    return {
        "name": name,
        "network": {"stations": stations, "lines": lines},
        "horizon": horizon,
        "transfer_time": rng.randint(1, 2),
        "commodities": commodities,
        "incidents": incidents,
        "candidates": candidates,
        "existing_choices": existing,
        "candidate_choices": [0, 1, 2],
        "budget": {"trains": rng.choice([3, 4, 100]), "buses": rng.choice([2, 100])},
        "service_cost": 0,
    }


class Graph:
    """Line-nodes per (line, position, step), entry nodes per (station, step), one sink per station."""

    def __init__(self, inst):
        self.T = T = inst["horizon"]
        w = inst["transfer_time"]
        self.lines = inst["network"]["lines"]
        self.keys = []
        self.index = {}
        self.arcs = []  # dicts: tail, head, cost, kind, line, time, active

        def node(key):
            if key not in self.index:
                self.index[key] = len(self.keys)
                self.keys.append(key)
            return self.index[key]

        for l in self.lines:
            for i, s in enumerate(l["stations"]):
                for t in range(T):
                    node(f"L:{l['id']}:{i}:{t}")
        for s in inst["network"]["stations"]:
            for t in range(T):
                node(f"E:{s['id']}:{t}")
            node(f"Z:{s['id']}")

        blocked = set()
        for inc in inst["incidents"]:
            u, v = inc["segment"]
            for t in range(inc["start"], inc["end"]):
                if inc["directions"] in ("both", "forward"):
                    blocked.add((u, v, t))
                if inc["directions"] in ("both", "backward"):
                    blocked.add((v, u, t))

        def arc(tail, head, cost, kind, line=None, time=0, active=True):
            self.arcs.append({"tail": node(tail), "head": node(head), "cost": cost, "kind": kind,
                              "line": line, "time": time, "active": active})

        for li, l in enumerate(self.lines):
            st = l["stations"]
            for i, r in enumerate(l["runtimes"]):
                for t in range(T - r):
                    arc(f"L:{l['id']}:{i}:{t}", f"L:{l['id']}:{i + 1}:{t + r}", r, "service", li, t,
                        (st[i], st[i + 1], t) not in blocked)
            for i in range(len(st)):
                for t in range(T - 1):
                    arc(f"L:{l['id']}:{i}:{t}", f"L:{l['id']}:{i}:{t + 1}", 1, "wait", li, t)
        for s in inst["network"]["stations"]:
            sid = s["id"]
            at = [(l["id"], l["stations"].index(sid)) for l in self.lines if sid in l["stations"]]
            for la, pa in at:
                for lb, pb in at:
                    if la == lb:
                        continue
                    for t in range(T - w):
                        arc(f"L:{la}:{pa}:{t}", f"L:{lb}:{pb}:{t + w}", w, "transfer", None, t)
            for l, p in at:
                for t in range(T):
                    arc(f"E:{sid}:{t}", f"L:{l}:{p}:{t}", 0, "entry", None, t)
            for l, p in at:
                for t in range(T):
                    arc(f"L:{l}:{p}:{t}", f"Z:{sid}", 0, "sink", None, t)


def solve_for(inst, g, n):
    T = g.T
    comms = inst["commodities"]
    V = max(1, sum(c["demand"] for c in comms))
    delta = 1.0 / (4.0 * V * T)
    active = [a for a in g.arcs if a["active"]]
    caps = []
    for a in active:
        if a["kind"] == "service":
            l = g.lines[a["line"]]
            caps.append(l["capacity"] * n[a["line"]] // l["headway"])
        else:
            caps.append(None)
    A, P, N = len(active), len(comms), len(g.keys)
    nv = P * (A + 1)
    cost = np.zeros(nv)
    true_cost = np.zeros(nv)
    overflow = T * 10
    for p in range(P):
        for j, a in enumerate(active):
            c = a["cost"]
            true_cost[p * (A + 1) + j] = c
            if a["kind"] == "wait":
                c += delta * (T - a["time"]) / T
            cost[p * (A + 1) + j] = c
        cost[p * (A + 1) + A] = overflow
        true_cost[p * (A + 1) + A] = overflow

    rows = P * N + sum(1 for c in caps if c is not None)
    M = lil_matrix((rows, nv))
    lo = np.zeros(rows)
    hi = np.zeros(rows)
    for p, c in enumerate(comms):
        src = g.index[f"E:{c['origin']}:{c['start']}"]
        dst = g.index[f"Z:{c['destination']}"]
        base = p * (A + 1)
        for j, a in enumerate(active):
            M[p * N + a["tail"], base + j] -= 1
            M[p * N + a["head"], base + j] += 1
        M[p * N + src, base + A] -= 1
        M[p * N + dst, base + A] += 1
        lo[p * N + src] = hi[p * N + src] = -c["demand"]
        lo[p * N + dst] = hi[p * N + dst] = c["demand"]
    r = P * N
    for j, a in enumerate(active):
        if caps[j] is None:
            continue
        for p in range(P):
            M[r, p * (A + 1) + j] = 1
        lo[r] = -np.inf
        hi[r] = caps[j]
        r += 1
    res = milp(cost, constraints=LinearConstraint(M.tocsr(), lo, hi), integrality=np.ones(nv),
               bounds=Bounds(0, np.inf), options={"mip_rel_gap": 0.0, "presolve": True})
    assert res.success, res.message
    x = np.round(res.x).astype(int)
    objective = int(round(float(true_cost @ x)))
    flows, over = [], []
    for p in range(P):
        base = p * (A + 1)
        for j, a in enumerate(active):
            if x[base + j] > 0:
                flows.append({"commodity": p, "tail": g.keys[a["tail"]], "head": g.keys[a["head"]],
                              "kind": a["kind"], "amount": int(x[base + j])})
        over.append(int(x[base + A]))
    load = {}
    for p in range(P):
        for j in range(A):
            load[j] = load.get(j, 0) + x[p * (A + 1) + j]
    wasteful = 0
    for j, a in enumerate(active):
        if a["kind"] != "wait" or load[j] == 0:
            continue
        for k, b in enumerate(active):
            if b["kind"] == "service" and b["tail"] == a["tail"] and load[k] < caps[k]:
                wasteful += 1
    return objective, flows, over, wasteful


def within_budget(inst, n):
    trains = sum(v for v, l in zip(n, inst["network"]["lines"]) if l["mode"] == "train")
    buses = sum(v for v, l in zip(n, inst["network"]["lines"]) if l["mode"] == "bus")
    return trains <= inst["budget"]["trains"] and buses <= inst["budget"]["buses"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=25)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "mip_oracle.json"))
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = []
    for k in range(args.count):
        inst = random_instance(rng, f"tiny-{k:02d}")
        g = Graph(inst)
        choices = [inst["candidate_choices"] if l["id"] in inst["candidates"] else inst["existing_choices"]
                   for l in inst["network"]["lines"]]
        per_n = []
        best = None
        for n in itertools.product(*choices):
            n = list(n)
            if not within_budget(inst, n):
                continue
            obj, flows, over, wasteful = solve_for(inst, g, n)
            per_n.append({"n": n, "objective": obj, "wasteful_waits": wasteful})
            key = (obj, sum(n), n)
            if best is None or key < best[0]:
                best = (key, n, flows, over, wasteful)
        inst["oracle"] = {
            "node_count": len(g.keys), "arc_count": len(g.arcs),
            "per_n": per_n, "best_objective": best[0][0], "best_n": best[1],
            "best_flows": best[2], "best_overflow": best[3],
        }
        out.append(inst)
        print(inst["name"], "best", best[0][0], "n", best[1], "vectors", len(per_n),
              "wasteful", sum(r["wasteful_waits"] for r in per_n))
    pathlib.Path(args.out).write_text(json.dumps({"generator_seed": args.seed, "instances": out}, indent=1) + "\n")


if __name__ == "__main__":
    main()
