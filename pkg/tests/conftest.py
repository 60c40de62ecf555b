"""Shared oracles: plain breadth-first searches with no scipy in the loop."""

from __future__ import annotations

import os
import sys
from collections import deque

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

N8 = [(dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)]


def bfs_components(mask: np.ndarray) -> list[set[tuple[int, int]]]:
    """8-connected components of a boolean mask as sets of (y, x)."""
    h, w = mask.shape
    seen = np.zeros_like(mask, dtype=bool)
    comps = []
    for y0, x0 in zip(*np.nonzero(mask)):
        if seen[y0, x0]:
            continue
        comp = set()
        q = deque([(int(y0), int(x0))])
        seen[y0, x0] = True
        while q:
            y, x = q.popleft()
            comp.add((y, x))
            for dy, dx in N8:
                yy, xx = y + dy, x + dx
                if 0 <= yy < h and 0 <= xx < w and mask[yy, xx] and not seen[yy, xx]:
                    seen[yy, xx] = True
                    q.append((yy, xx))
        comps.append(comp)
    return comps


def hysteresis_audit(edges: np.ndarray, nms: np.ndarray, low: float, high: float) -> bool:
    """Every edge pixel is weak and reaches a strong pixel through edge pixels."""
    if np.any(edges & ~(nms > low)):
        return False
    for comp in bfs_components(edges):
        if not any(nms[y, x] > high for y, x in comp):
            return False
    return True


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion, with the measured detail."""
    lines = []
    for status in ("passed", "failed"):
        for rep in terminalreporter.stats.get(status, []):
            if rep.when != "call" or "test_acceptance" not in rep.nodeid:
                continue
            props = dict(rep.user_properties)
            lines.append((props.get("criterion", 0), rep.nodeid.split("::")[-1], status, props.get("detail", "")))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, status, detail in sorted(lines):
        terminalreporter.write_line(f"criterion {num:>2} {'PASS' if status == 'passed' else 'FAIL'}  {name}  {detail}")
