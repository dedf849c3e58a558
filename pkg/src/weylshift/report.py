"""Figure rendering for the CLI report paths.

Every subcommand that writes a delimited trace can also render a matching
figure next to it; figures are plain matplotlib PNGs produced headlessly.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_line_figure(path, x, series, xlabel, ylabel, title=None, logy=False):
    """One PNG with the given (label, values) series over a common x axis."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for label, y in series:
        ax.plot(x, y, marker="o", markersize=3, linewidth=1.2, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(loc="best", fontsize=9)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_measure_figure(path, measures, labels, xlabel="t", title=None):
    """Densities as lines and atoms as stems for a few measures."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for mu, label in zip(measures, labels):
        if mu.density_breaks.size:
            ax.plot(mu.density_breaks, mu.density_values, linewidth=1.0,
                    label=label)
        if mu.atom_positions.size:
            ax.stem(mu.atom_positions, mu.atom_weights,
                    linefmt="C3-", markerfmt="C3o", basefmt=" ")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("density / atom weight")
    if title:
        ax.set_title(title)
    if len(measures) > 1:
        ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
