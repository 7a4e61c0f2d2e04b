# -*- coding: utf-8 -*-
"""
SVG scatter plots of samples and of the accept/reject principle.

Output is plain text with fixed-precision coordinates, so equal inputs give equal files.
"""
import io

import numpy as np

SIZE = 800
MARGIN = 60
PLOT = SIZE - 2 * MARGIN


def _header(title):
    return [
        '<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="0 0 {0} {0}">'.format(SIZE),
        '<rect x="0" y="0" width="{0}" height="{0}" fill="white"/>'.format(SIZE),
        '<text x="{}" y="30" font-size="16" text-anchor="middle">{}</text>'.format(SIZE // 2, title),
    ]


def _axes(x_range, y_range, x_label, y_label):
    bottom = MARGIN + PLOT
    lines = [
        '<rect x="{m}" y="{m}" width="{p}" height="{p}" fill="none" stroke="black"/>'.format(m=MARGIN, p=PLOT),
        '<text x="{}" y="{}" font-size="12" text-anchor="start">{!r}</text>'.format(MARGIN, bottom + 20, x_range[0]),
        '<text x="{}" y="{}" font-size="12" text-anchor="end">{!r}</text>'.format(MARGIN + PLOT, bottom + 20,
                                                                                  x_range[1]),
        '<text x="{}" y="{}" font-size="12" text-anchor="end">{!r}</text>'.format(MARGIN - 6, bottom, y_range[0]),
        '<text x="{}" y="{}" font-size="12" text-anchor="end">{!r}</text>'.format(MARGIN - 6, MARGIN + 12,
                                                                                  y_range[1]),
        '<text x="{}" y="{}" font-size="14" text-anchor="middle">{}</text>'.format(SIZE // 2, bottom + 40, x_label),
        '<text x="20" y="{0}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>'.format(
            SIZE // 2, y_label),
    ]
    return lines


def _to_pixels(values, lo, hi, flip=False):
    scaled = (np.asarray(values, dtype=np.float64) - lo) / (hi - lo) * PLOT
    return MARGIN + (PLOT - scaled if flip else scaled)


def _circles(xs, ys, style):
    return ['<circle cx="{:.2f}" cy="{:.2f}" r="1" {}/>'.format(x, y, style) for x, y in zip(xs, ys)]


def _write(path, lines):
    lines.append('</svg>')
    with io.open(path, 'w', encoding='utf-8', newline='\n') as fd:
        fd.write('\n'.join(lines) + '\n')


def scatter_svg(path, points, box, names, title='Rejection Monte Carlo samples'):
    """Scatter of two-dimensional samples over their support box."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    (x_lo, x_hi), (y_lo, y_hi) = box.bounds
    lines = _header('{} (n = {})'.format(title, points.shape[0]))
    lines.extend(_axes((x_lo, x_hi), (y_lo, y_hi), names[0], names[1]))
    lines.extend(_circles(_to_pixels(points[:, 0], x_lo, x_hi), _to_pixels(points[:, 1], y_lo, y_hi, flip=True),
                          'fill="black"'))
    _write(path, lines)


def principle_svg(path, trace, target, name, curve_points=200):
    """
    Proposals in the rectangle box x [0, c]: accepted points filled, rejected points hollow,
    with the density drawn on top.
    """
    (x_lo, x_hi), = target.support.bounds
    c = target.bound_c
    xs = _to_pixels(trace.points[:, 0], x_lo, x_hi)
    ys = _to_pixels(trace.heights, 0.0, c, flip=True)
    accepted = np.asarray(trace.accepted, dtype=bool)

    lines = _header('Accepted {} of {} proposals'.format(int(accepted.sum()), len(accepted)))
    lines.extend(_axes((x_lo, x_hi), (0.0, c), name, 'f({})'.format(name)))
    lines.extend(_circles(xs[~accepted], ys[~accepted], 'fill="none" stroke="gray"'))
    lines.extend(_circles(xs[accepted], ys[accepted], 'fill="black"'))

    grid = np.linspace(x_lo, x_hi, curve_points)
    curve = target.field(grid.reshape(-1, 1))
    coords = ' '.join('{:.2f},{:.2f}'.format(x, y) for x, y in zip(_to_pixels(grid, x_lo, x_hi),
                                                                   _to_pixels(curve, 0.0, c, flip=True)))
    lines.append('<polyline points="{}" fill="none" stroke="red" stroke-width="2"/>'.format(coords))
    _write(path, lines)
