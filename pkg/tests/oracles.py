"""Deliberately naive reference implementations. Nothing here imports the package."""

import math


def neighbors(img, x, y):
    # I0 east, then counter-clockwise; rows grow downwards
    return [img[y][x + 1], img[y - 1][x + 1], img[y - 1][x], img[y - 1][x - 1],
            img[y][x - 1], img[y + 1][x - 1], img[y + 1][x], img[y + 1][x + 1]]


def quest_code(img, x, y, omega_rule=lambda v: v // 3):
    p = 8
    I = neighbors(img, x, y)
    ic = img[y][x]
    code = 0
    for v in range(p - 2):
        w = omega_rule(v)
        psi = math.floor(v / 4) * (p - 2)
        q = (I[(2 * v - w + psi) % p] + I[(2 * (v - w + 1)) % p]) / ((psi / 3) + 2)
        f = 1 if q - ic >= 0 else 0
        code += f * 2 ** v
    return code


def lbp_code(img, x, y):
    I = neighbors(img, x, y)
    ic = img[y][x]
    return sum((1 if I[k] - ic >= 0 else 0) * 2 ** k for k in range(8))


def code_map(img, fn):
    h, w = len(img), len(img[0])
    return [[fn(img, x, y) for x in range(1, w - 1)] for y in range(1, h - 1)]


def bilinear(img, out_w, out_h):
    h, w = len(img), len(img[0])
    out = []
    for oy in range(out_h):
        row = []
        sy = min(max((oy + 0.5) * h / out_h - 0.5, 0), h - 1)
        for ox in range(out_w):
            sx = min(max((ox + 0.5) * w / out_w - 0.5, 0), w - 1)
            x0, y0 = int(sx), int(sy)
            x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
            ax, ay = sx - x0, sy - y0
            val = ((1 - ax) * (1 - ay) * img[y0][x0] + ax * (1 - ay) * img[y0][x1]
                   + (1 - ax) * ay * img[y1][x0] + ax * ay * img[y1][x1])
            row.append(math.floor(val + 0.5))
        out.append(row)
    return out


def best_linear_accuracy_grid(points, labels, steps=720):
    """Best accuracy of sign(w.x + b) over a grid of directions and offsets."""
    best = 0.0
    for k in range(steps):
        th = 2 * math.pi * k / steps
        w = (math.cos(th), math.sin(th))
        projections = sorted(w[0] * x + w[1] * y for x, y in points)
        cuts = [projections[0] - 1] + [(a + b) / 2 for a, b in zip(projections, projections[1:])] \
            + [projections[-1] + 1]
        for cut in cuts:
            hits = sum((1 if w[0] * x + w[1] * y - cut >= 0 else -1) == lab
                       for (x, y), lab in zip(points, labels))
            best = max(best, hits / len(points))
    return best


XOR_POINTS = [(0, 0), (1, 1), (0, 1), (1, 0)]
XOR_LABELS = [1, 1, -1, -1]
