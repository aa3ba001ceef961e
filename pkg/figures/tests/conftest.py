import json

import numpy as np
import pytest


@pytest.fixture
def trajectory_csv(tmp_path):
    """A small synthetic ensemble trajectory."""
    t = np.linspace(0.0, 0.3, 61)
    m_w = 0.5 + 0.05 * np.sin(20 * t)
    path = tmp_path / "ensemble.csv"
    lines = ["t,m_w,m_x,V_w,mass"]
    for i in range(len(t)):
        lines.append(f"{t[i]},{m_w[i]},0.0,0.001,1.0")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def run_csv(tmp_path):
    t = np.linspace(0.0, 0.3, 61)
    m_w = 0.5 + 0.04 * np.cos(15 * t)
    path = tmp_path / "run_0.csv"
    lines = ["t,m_w,m_x,V_w,mass,state"]
    for i in range(len(t)):
        state = "Bubble" if m_w[i] > 0.525 else "Normal"
        lines.append(f"{t[i]},{m_w[i]},0.0,0.001,1.0,{state}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def bands_csv(tmp_path):
    t = np.linspace(0.03, 0.3, 55)
    mid = 0.5 + 0.02 * np.sin(10 * t)
    sig = 0.01 + 0.005 * np.cos(7 * t) ** 2
    path = tmp_path / "bands.csv"
    lines = ["t,M_n,sigma,r_plus,r_minus,bandwidth"]
    for i in range(len(t)):
        rp, rm = mid[i] + 2 * sig[i], mid[i] - 2 * sig[i]
        bw = 100 * (rp - rm) / 0.5
        lines.append(f"{t[i]},{mid[i]},{sig[i]},{rp},{rm},{bw}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def sweep_csv(tmp_path):
    path = tmp_path / "sweep.csv"
    rows = ["alpha,beta,pct_bubble,pct_crash"]
    for beta in (0.05, 0.25):
        for alpha in (0.1, 0.5, 0.9):
            rows.append(f"{alpha},{beta},{10 * alpha + beta},{5 * alpha}")
    path.write_text("\n".join(rows) + "\n")
    return str(path)


@pytest.fixture
def summary_json(tmp_path):
    doc = {
        "config": {
            "model": {"band_R": 0.025},
            "scenario": {
                "background": {"kind": "piecewise",
                               "points": [[0.0, 0.6], [0.15, 0.45]]},
            },
        },
    }
    path = tmp_path / "summary.json"
    path.write_text(json.dumps(doc))
    return str(path)
