from setuptools import setup

setup(
    name="cycleforge",
    version="0.1.0",
    py_modules=[
        "settings",
        "errors",
        "schemas",
        "loaders",
        "simplicial",
        "coxeter",
        "permutahedron",
        "small_cover",
        "realization",
        "sphere_maps",
        "main",
    ],
    install_requires=[
        "python-dotenv>=0.19.0",
        "pydantic>=2.0",
        "numpy>=1.24",
        "scipy>=1.10",
        "sympy>=1.12",
        "mpmath>=1.3",
        "networkx>=3.1",
    ],
    extras_require={
        "test": ["pytest>=7.0", "hypothesis>=6.0"],
    },
    entry_points={
        "console_scripts": ["cycleforge=main:main"],
    },
    python_requires=">=3.9",
)
