"""smachine: a workbench for S-machine rewriting systems.

Simulate S-machine computations, build the adding machine and its
composition with an arbitrary machine, emit the associated group
presentation with the hub relation, and evaluate the quantitative
bounds at desk scale.
"""

__version__ = "0.1.0"
