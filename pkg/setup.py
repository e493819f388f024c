from setuptools import setup, find_packages

setup(
    name='ssclab-py',
    version='0.1.0',
    description='LiDAR semantic scene completion toolkit',
    packages=find_packages(exclude=['pytest', 'functest', 'doc']),
    include_package_data=True,
    python_requires='>=3.8',
    install_requires=[
        'numpy',
        'pandas',
        'tqdm',
        'colorama',
        'matplotlib',
        'imageio',
    ],
    extras_require={
        'test': ['pytest', 'hypothesis'],
        'functest': ['jupyter', 'jupytext', 'nbconvert', 'nbformat', 'nbmerge'],
    },
    entry_points={
        'console_scripts': ['ssclab=ssclab.cli:main'],
    },
    license='MIT',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: MIT License'
    ],
    keywords='Semantic scene completion, LiDAR, Point cloud',
    long_description='ssclab generates and rectifies completion labels from LiDAR sequences, runs the sparsity-preserving completion network, computes the dense-to-sparse distillation loss with the training objective and its gradients, and evaluates predictions with IoU metrics.',
)
