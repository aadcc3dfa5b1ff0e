"""Independent numpy/scipy oracle for the golden values used by the C++ tests.

Run from this directory: python3 oracle.py > oracles.json
"""
import json

import numpy as np
from scipy.linalg import logm

SETTINGS = [(np.pi / 4, 0.9), (1.3, 0.3), (1.3, 0.6), (1.3, 1.4), (np.pi, 0.25), (1.3, 0.0)]
N = 90
S0 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def coeffs(d, e):
    z = (d + 1j * e) / 2
    return np.cos(z), np.sin(z)


def step(d, e, q):
    a, b = coeffs(d, e)
    t = np.array([[a, 1j * b * np.exp(1j * q)], [1j * b * np.exp(-1j * q), a]])
    w = (S0 + 1j * SX) / np.sqrt(2)
    return t @ w


def closed(d, e, q):
    a, b = coeffs(d, e)
    w = a - b * np.cos(q)
    energy = np.arccos(w / np.sqrt(2))
    den = np.sqrt(2 - w * w)
    n = np.array([-(a + b * np.cos(q)), b * np.sin(q), b * np.sin(q)]) / den
    return energy, n


def heff(d, e, q):
    return 1j * logm(step(d, e, q))


def winding(d, e, n_q=N):
    qs = 2 * np.pi * np.arange(n_q) / n_q
    ns = np.array([closed(d, e, q)[1] for q in qs])
    for k in range(1, n_q):
        if np.linalg.norm(ns[k] + ns[k - 1]) < np.linalg.norm(ns[k] - ns[k - 1]):
            ns[k] = -ns[k]
    s = np.array([0, 1, -1]) / np.sqrt(2)
    total = 0
    for k in range(n_q):
        nxt = ns[(k + 1) % n_q]
        prv = ns[k - 1]
        if np.linalg.norm(nxt + ns[k]) < np.linalg.norm(nxt - ns[k]):
            nxt = -nxt
        if np.linalg.norm(prv + ns[k]) < np.linalg.norm(prv - ns[k]):
            prv = -prv
        total += np.cross(ns[k], (nxt - prv) / 2) @ s
    return total / (2 * np.pi)


def overlap(h):
    _, v = np.linalg.eig(h)
    v = v / np.linalg.norm(v, axis=0)
    return abs(np.vdot(v[:, 0], v[:, 1])) ** 2


def pauli(u):
    u = u / np.sqrt(np.linalg.det(u))
    return [np.trace(u) / 2] + [np.trace(p @ u) / 2 for p in (SX, SY, SZ)]


def ratios(u):
    kets = {
        "L": np.array([1, 0], dtype=complex),
        "R": np.array([0, 1], dtype=complex),
    }
    kets["H"] = (kets["L"] + kets["R"]) / np.sqrt(2)
    kets["V"] = (kets["L"] - kets["R"]) / (np.sqrt(2) * 1j)
    kets["D"] = (kets["L"] + 1j * kets["R"]) / np.sqrt(2)
    kets["A"] = (kets["L"] - 1j * kets["R"]) / np.sqrt(2)
    partner = {"L": "R", "R": "L", "H": "V", "V": "H", "D": "A", "A": "D"}
    out = []
    for i in "LHD":
        for j in "LRHVDA":
            inten = abs(np.vdot(kets[j], u @ kets[i])) ** 2
            other = abs(np.vdot(kets[partner[j]], u @ kets[i])) ** 2
            out.append(inten / (inten + other))
    return np.array(out)


def cplx(z):
    return [float(np.real(z)), float(np.imag(z))]


def main():
    out = {}
    samples = []
    for d, e in SETTINGS:
        for k in (0, 7, 23, 45, 61, 88):
            q = 2 * np.pi * k / N
            u = step(d, e, q)
            energy, n = closed(d, e, q)
            h = heff(d, e, q)
            samples.append({
                "delta": d, "eta": e, "q": q,
                "u": [[cplx(u[r, c]) for c in range(2)] for r in range(2)],
                "energy": cplx(energy),
                "n": [cplx(x) for x in n],
                "heff_eigs": sorted([cplx(x) for x in np.linalg.eigvals(h)]),
                "ratios": ratios(u).tolist(),
            })
    out["samples"] = samples

    out["winding_90"] = [{"delta": d, "eta": e, "nu": cplx(winding(d, e))} for d, e in SETTINGS]

    # Cost of the truth at a neighboring momentum.
    d, e, k = 1.3, 0.6, 10
    q0 = 2 * np.pi * k / N
    q1 = 2 * np.pi * (k + 1) / N
    out["neighbor_cost"] = {"delta": d, "eta": e, "q_data": q1, "q_candidate": q0,
                            "cost": float(np.sum((ratios(step(d, e, q0)) - ratios(step(d, e, q1))) ** 2))}

    delta = 1.3
    eta_c = 2 * np.arccosh(np.sqrt(2) * np.cos(delta / 2))
    q_c = np.arccos(-np.tan(delta / 2))
    out["ep"] = {"delta": delta, "eta_c": eta_c, "q_c": q_c, "q_c_mirror": 2 * np.pi - q_c}

    r = np.cos(np.pi / 8) * S0 + 1j * np.sin(np.pi / 8) * SX
    pt = []
    for eta in (0.3, 0.6, 1.4):
        h = r @ heff(delta, eta, q_c) @ r.conj().T
        za, zb = h[0, 1], h[1, 0]
        lam, vecs = np.linalg.eig(h)
        order = np.argsort(-lam.real - lam.imag)
        psi = vecs[:, order[0]] / np.linalg.norm(vecs[:, order[0]])
        phi = np.angle(za)
        vpsi = np.array([np.exp(1j * phi) * np.conj(psi[0]), np.exp(-1j * phi) * np.conj(psi[1])])
        pt.append({"eta": eta, "z_a": cplx(za), "z_b": cplx(zb),
                   "lambda": [cplx(x) for x in lam[order]],
                   "order_parameter": float(1 - abs(np.vdot(psi, vpsi)))})
    out["pt"] = pt

    minima = []
    for d, e in SETTINGS[:5]:
        qs = 2 * np.pi * np.arange(N) / N
        inf = np.array([1 - overlap(heff(d, e, q)) for q in qs])
        mins = [k for k in range(N) if inf[k] < inf[k - 1] and inf[k] < inf[(k + 1) % N]]
        minima.append({"delta": d, "eta": e, "minima": mins,
                       "min": float(inf.min()), "max": float(inf.max())})
    out["infidelity"] = minima

    out["calibration"] = {
        "plain_0146_0854": 2 * np.arctan(np.sqrt(0.854 / 0.146)),
        "eta_e2": 1.0,
        "ratio_eta_14": float(np.exp(2.8)),
    }
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
