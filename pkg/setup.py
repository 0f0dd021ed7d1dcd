from setuptools import setup, find_packages

setup(
    name="mec-partition-offloading",
    version="1.0.0",
    description="Partitioned task offloading study for 5G multi-access edge computing",
    packages=find_packages(exclude=["tests"]),
    py_modules=["main"],
    install_requires=[
        "fastapi>=0.115.0",
        "uvicorn>=0.32.0",
        "python-dotenv>=1.0.0",
        "pydantic>=2.10.0",
        "numpy>=1.26.0",
        "scipy>=1.11.0",
        "pandas>=2.1.0",
    ],
    entry_points={"console_scripts": ["mec-offload=app.cli:main"]},
    python_requires=">=3.10",
)
