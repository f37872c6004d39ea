# Engine package: simulators, verification studies and the catbp CLI.

__version__ = "0.1.0"
