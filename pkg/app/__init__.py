# Critical points of E6: Eisenstein numerics, zero counting, curve tracing and monodromy
