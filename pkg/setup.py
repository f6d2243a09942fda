from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="spin-parity",
    version="0.1.0",
    author="DataGriff",
    description="Simulator for Bell-state measurement and GHZ growth by spin parity checks in quantum dots",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.9",
    install_requires=[
        "PyYAML>=6.0.1",
        "Jinja2>=3.1.3",
        "pandas>=2.1.4",
        "numpy>=1.26.0",
        "scipy>=1.11.4",
    ],
    extras_require={
        "test": ["pytest>=7.4.0"],
    },
    entry_points={
        "console_scripts": [
            "spin-parity=spin_parity.cli:main",
        ],
    },
)
