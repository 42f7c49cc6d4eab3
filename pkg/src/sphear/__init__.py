"""sphear: spherical-array capture, simulation, and speech enhancement.

Subpackages and modules:

- ``array``      microphone geometries, coordinates, steering vectors
- ``spherical``  spherical harmonics and the discrete transform
- ``acoustics``  image-method room impulse responses and mixing
- ``spectral``   STFT analysis/synthesis
- ``features``   per-bin spherical-harmonic features and input packing
- ``enhancer``   the dual-encoder gated convolutional recurrent network
- ``metrics``    STOI and SI-SDR evaluation
- ``pipeline``   dataset generation, training/eval drivers, CLI, file formats
"""

__version__ = "0.1.0"
