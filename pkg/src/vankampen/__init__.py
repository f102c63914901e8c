"""Van Kampen diagrams, Dehn-area oracles and word problems for the G_n / P_n / Q_n families."""

__version__ = "0.1.0"
