"""Quantum walks on joined quarter planes: simulation, reduction, generating functions and limit laws."""
