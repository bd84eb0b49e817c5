"""Wave-matrix Lindbladization: simulate Lindblad evolution from program-state copies."""

__version__ = "0.1.0"
