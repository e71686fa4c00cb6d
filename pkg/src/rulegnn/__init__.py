"""Rule based neural network layers and graph classifiers.

Layers whose sparse weight and bias layout is computed per input sample
from a formal rule, plus the graph classifier stack built from
Weisfeiler-Leman, pattern-counting and aggregation rules.
"""

__version__ = "0.1.0"
