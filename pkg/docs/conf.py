#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Sphinx configuration for the mdpcert documentation.

The API pages are generated with autodoc, so mdpcert must be importable
(``pip install -e .[dev]``) before running ``invoke docs``.
"""
import sphinx_rtd_theme

import mdpcert

# -- General configuration -----------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.autosectionlabel',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = 'mdpcert'
copyright = '2022, mdpcert contributors'
author = 'mdpcert contributors'

# full x.y.z for |version|, x.y for |release|
version = mdpcert.__version__
release = '.'.join(version.split('.')[:2])

language = None
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'

# section labels are prefixed with the page name, e.g. usage:Exit Codes
autosectionlabel_prefix_document = True

# -- Options for HTML output ---------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]
html_static_path = []
htmlhelp_basename = 'mdpcertdoc'

man_pages = [(master_doc, 'mdpcert', 'mdpcert Documentation', [author], 1)]

# -- Options for extensions ----------------------------------------------------

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'cmd2': ('https://cmd2.readthedocs.io/en/stable/', None),
}

autodoc_default_options = {'member-order': 'bysource'}

# Type hints on attrs classes and numpy aliases do not resolve to documented targets
nitpick_ignore = [
    ('py:class', 'Generator'),
    ('py:class', 'np.ndarray'),
    ('py:class', 'numpy.ndarray'),
    ('py:class', 'numpy.random._generator.Generator'),
    ('py:class', 'TextIO'),
    ('py:class', 'cmd2.cmd2.Cmd'),
    ('py:class', 'cmd2.parsing.Statement'),
    ('py:class', 'attr.Attribute'),
]
