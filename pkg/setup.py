'''
setup.py - a setup script
Copyright (C) 2026 the PLSlope contributors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
'''

import pathlib
from setuptools import setup

# The directory containing this file
HERE = pathlib.Path(__file__).parent

# The text of the README file
README = (HERE / "README.md").read_text()

setup(
    name="PLSlope",
    version="0.1.0",
    description="Exact piecewise-linear interval maps: entropy, constant-slope models and Markov diagrams",
    long_description=README,
    long_description_content_type="text/markdown",
    license="Apache License 2.0",
    classifiers=[
        "License :: OSI Approved :: Apache Software License",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Programming Language :: Python :: 3",
    ],
    packages=["plslope", "plslope.lab", "plslope.persist", "plslope.commands"],
    include_package_data=True,
    python_requires=">=3.8",
    install_requires=["pyyaml", "jinja2", "deepdiff", "numpy", "networkx", "click"],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["plslope=plslope.cli:main"]},
)
