class InvalidArgumentError(ValueError):
    """Raised for malformed dimensions, labels, permutations or names."""


class DegenerateInstanceError(ArithmeticError):
    """Raised when an instance yields zero SNR for its intended codeword."""
