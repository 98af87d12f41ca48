from setuptools import setup, find_packages
version = {}
with open("tsrl/__version__.py") as f:
    exec(f.read(), version)
    
with open("README.md", "r", encoding="utf-8") as f:
    long_description = f.read()
    
setup(
    name="tsrl-curriculum",
    version=version["__version__"],
    description="A PPO tutor that learns per-sample loss weights for a student classifier",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,

    install_requires=[
        "click",
        "numpy",
        "pydantic>=2",
        "python-dotenv",
    ],

    extras_require={
        "test": ["pytest"],
    },

    entry_points={
        "console_scripts": [
            "tsrl=tsrl.cli:cli",
        ],
    },

    classifiers=[
        "Programming Language :: Python :: 3.10",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],

    python_requires=">=3.10",
)
