from setuptools import setup, find_packages

with open("README.md", "r") as fh:
    long_description = fh.read()

setup(name='rmc',
      version='1.0.0',
      description='Rejection Monte Carlo sampling and integration toolkit',
      long_description=long_description,
      long_description_content_type="text/markdown",
      packages=find_packages(exclude=['tests', 'tests.*']),
      python_requires='>=3.8',
      install_requires=[
          'numpy>=1.20',
          'jsonschema>=3.0.0',
      ],
      tests_require=[
          'pytest',
      ],
      test_suite="tests",
      include_package_data=True,
      package_data={'rmc': ['data/*.json']},
      entry_points={
          'console_scripts': ['rmc=rmc.cli:main'],
      },
      classifiers=[
          "Programming Language :: Python :: 3",
          "Operating System :: OS Independent",
          "Intended Audience :: Science/Research",
          "License :: OSI Approved :: MIT License",
          "Natural Language :: English",
          "Topic :: Scientific/Engineering :: Mathematics"
      ]
      )
