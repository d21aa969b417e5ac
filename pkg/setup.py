from setuptools import setup

setup(
    package_data={'ness_py': [
    ]},
)
