#!/usr/bin/python
# coding=utf-8
"""
Setuptools setup file, used to install or test 'mdpcert'
"""
import codecs

from setuptools import (
    setup,
)

DESCRIPTION = "mdpcert - exact tabular MDP solvers, generative-model planning and numerical certification of error bounds"

with codecs.open('README.md', encoding='utf8') as f:
    LONG_DESCRIPTION = f.read()

CLASSIFIERS = list(
    filter(
        None,
        map(
            str.strip,
            """
Development Status :: 4 - Beta
Environment :: Console
Operating System :: OS Independent
Intended Audience :: Science/Research
License :: OSI Approved :: MIT License
Programming Language :: Python
Programming Language :: Python :: 3
Programming Language :: Python :: 3.7
Programming Language :: Python :: 3.8
Programming Language :: Python :: 3.9
Programming Language :: Python :: 3.10
Programming Language :: Python :: Implementation :: CPython
Topic :: Scientific/Engineering :: Mathematics
""".splitlines(),
        ),
    )
)  # noqa: E128

SETUP_REQUIRES = ['setuptools >= 34.4', 'setuptools_scm >= 3.0']

INSTALL_REQUIRES = [
    'attrs >= 16.3.0',
    'cmd2 >= 2.3, < 3',
    'importlib_metadata>=1.6.0;python_version<"3.8"',
    'numpy >= 1.17',
    'scipy >= 1.4',
    'typing_extensions; python_version<"3.8"',
]

EXTRAS_REQUIRE = {
    # Extra dependencies for running unit tests
    'test': [
        'codecov',
        'coverage',
        'hypothesis',
        'pytest>=4.6',
        'pytest-cov',
        'pytest-mock',
    ],
    # development only dependencies:  install with 'pip install -e .[dev]'
    'dev': [
        'black',
        'codecov',
        'doc8',
        'flake8',
        'hypothesis',
        'invoke',
        'isort',
        'mypy==0.902',
        'nox',
        "pytest>=4.6",
        'pytest-cov',
        'pytest-mock',
        'sphinx',
        'sphinx-rtd-theme',
        'sphinx-autobuild',
        'twine>=1.11',
    ],
    'validate': [
        'flake8',
        'mypy==0.902',
        'types-pkg-resources',
    ],
}

PACKAGE_DATA = {
    'mdpcert': ['py.typed'],
}

ENTRY_POINTS = {
    'console_scripts': ['mdpcert = mdpcert.cli:main'],
}

setup(
    name="mdpcert",
    use_scm_version={'git_describe_command': 'git describe --dirty --tags --long'},
    description=DESCRIPTION,
    long_description=LONG_DESCRIPTION,
    long_description_content_type='text/markdown',
    classifiers=CLASSIFIERS,
    license='MIT',
    platforms=['any'],
    package_data=PACKAGE_DATA,
    packages=['mdpcert'],
    entry_points=ENTRY_POINTS,
    keywords='markov decision process reinforcement learning sample complexity',
    python_requires='>=3.7',
    setup_requires=SETUP_REQUIRES,
    install_requires=INSTALL_REQUIRES,
    extras_require=EXTRAS_REQUIRE,
)
