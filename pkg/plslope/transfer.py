import numpy as np

from plslope import logger

class TransferGrid():
    """Nodes carrying a CDF for the float pullback.

    The nodes are a uniform grid of ``grid_size`` cells joined with every dot of
    f, so f is affine and monotone on each cell and the pullback is exact at the
    nodes. Only the piecewise-linear projection between nodes loses accuracy.
    """

    def __init__(self, f, grid_size):
        fx, fy = f.as_arrays()
        self.fx = fx
        self.fy = fy
        self.nodes = np.union1d(np.linspace(0.0, 1.0, int(grid_size) + 1), fx)
        self.image = np.interp(self.nodes, fx, fy)
        self.midpoints = 0.5 * (self.nodes[:-1] + self.nodes[1:])
        self.mid_image = np.interp(self.midpoints, fx, fy)
        self.critical = np.array([float(c) for c in f.critical.points])

    def __len__(self):
        return len(self.nodes)

    def pull(self, values):
        """Unnormalized pullback: variation of F o f on [0, y] at every node."""
        composed = np.interp(self.image, self.nodes, values)
        return np.concatenate(([0.0], np.cumsum(np.abs(np.diff(composed)))))

    def projection_error(self, values):
        composed = np.interp(self.image, self.nodes, values)
        pulled = np.concatenate(([0.0], np.cumsum(np.abs(np.diff(composed)))))
        at_mid = pulled[:-1] + np.abs(np.interp(self.mid_image, self.nodes, values) - composed[:-1])
        interpolated = 0.5 * (pulled[:-1] + pulled[1:])
        norm = pulled[-1]
        if norm <= 0:
            return 0.0
        return float(np.max(np.abs(at_mid - interpolated)) / norm)


class TransferResult():
    __slots__ = ("values", "norm", "drift", "norm_drift", "iterations", "converged", "projection_error")

    def __init__(self, values, norm, drift, norm_drift, iterations, converged, projection_error):
        self.values = values
        self.norm = norm
        self.drift = drift
        self.norm_drift = norm_drift
        self.iterations = iterations
        self.converged = converged
        self.projection_error = projection_error


def run_transfer(grid, tol, max_iter, shift=1.0, stable_steps=5, initial=None):
    """Power iteration of the shifted pullback T + shift*I, renormalized to F(1) = 1."""
    values = grid.nodes.copy() if initial is None else np.asarray(initial, dtype=float)
    streak = 0
    drift = np.inf
    norm = np.nan
    norm_drift = np.inf
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        pulled = grid.pull(values)
        new_norm = pulled[-1]
        if new_norm <= 0:
            logger().warning("transfer: pullback collapsed to zero at step %d", iterations)
            break
        shifted = (pulled + shift * values) / (new_norm + shift)
        shifted[0] = 0.0
        shifted[-1] = 1.0
        drift = float(np.max(np.abs(shifted - values)))
        if not np.isnan(norm):
            norm_drift = abs(new_norm - norm)
        norm = new_norm
        values = shifted
        streak = streak + 1 if drift < tol else 0
        if iterations % 100 == 0:
            logger().debug("transfer: step %d norm %.15g drift %.3g", iterations, norm, drift)
        if streak >= stable_steps:
            converged = True
            break
    if not converged:
        logger().warning("transfer: no convergence after %d steps (drift %.3g)", iterations, drift)
    return TransferResult(values, float(norm), drift, float(norm_drift), iterations, converged, grid.projection_error(values))
