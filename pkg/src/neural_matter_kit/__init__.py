"""Neural Matter Kit: activation-free E-product (yat) networks from scratch."""

__version__ = "0.1.0"
