"""Domain layer: pure numerics on spinors, kernels, meshes and boundary operators."""
