# -*- coding: utf-8 -*-
#
# icodelab documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing
# dir. Values that are not set here keep the Sphinx defaults.

import sys
import os

# General information about the project.
project = 'icodelab'
copyright = '2026, icodelab developers'

# The version info is read from the package itself.
currentdir = os.path.abspath(os.path.dirname(__file__))
ver_file = os.path.join(currentdir, '..', project, 'version.py')
with open(ver_file) as f:
    exec(f.read())
source_version = __version__

sys.path.insert(0, os.path.abspath('../'))

# -- General configuration ------------------------------------------------

needs_sphinx = '1.0'  # numpydoc requires sphinx >= 1.0

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.doctest',
              'sphinx.ext.intersphinx',
              'sphinx.ext.autosummary',
              'sphinx.ext.mathjax',
              'numpydoc']

source_suffix = '.rst'
master_doc = 'index'

autosummary_generate = True
autodoc_default_options = {'members': True, 'inherited-members': True}
numpydoc_show_class_members = False

version = source_version
release = source_version

exclude_patterns = ['_build']
pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_theme = 'alabaster'
html_sidebars = {'**': ['localtoc.html', 'searchbox.html']}
html_domain_indices = False
htmlhelp_basename = 'icodelabdoc'

# -- Options for LaTeX / manual page output -------------------------------

latex_documents = [
  ('index', 'icodelab.tex', 'icodelab Documentation',
   'icodelab developers', 'manual'),
]

man_pages = [
    ('index', 'icodelab', 'icodelab Documentation',
     ['icodelab developers'], 1)
]

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable', None)}
