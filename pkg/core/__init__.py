# Synthesis core: formulas, circuits, GAND merging, synthesizers, simulation and sweeps
