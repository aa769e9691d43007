"""Class balancing with SMOTE or a tabular GAN, tree learners and a weighted ensemble."""
__version__ = "0.1.0"
