from setuptools import setup, find_packages

# To use a consistent encoding
from codecs import open
from os import path

here = path.abspath(path.dirname(__file__))

def readme():
    with open(path.join(here,'README.md')) as f:
        return f.read()

setup(name='echafaudage',
      version='0.1.0',
      description='Scaffolding inspection from terrestrial laser scans in python',
      long_description=readme(),
      license='MIT',
      classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Image Recognition',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
      ],
      packages=find_packages(exclude=['test', 'test.*']),
      package_data={
              'echafaudage': ['*.cfg']
              },
      install_requires=[
          'matplotlib',
          'numexpr',
          'numpy',
          'pandas',
          'plyfile',
          'pytest',
          'scikit-learn',
          'scipy>=1.10',
          'cytoolz'
          ],
      tests_require=[
          'pytest'
      ],
      entry_points={
          'console_scripts': ['echafaudage = echafaudage.cli:main']
      },
      python_requires='>=3.8',
      zip_safe=False)
