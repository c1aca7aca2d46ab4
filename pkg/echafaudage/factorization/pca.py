import numpy

from .. import backends as be


def eigen_descending(matrices: be.Tensor) -> be.Tuple[be.Tensor, be.Tensor]:
    """
    Eigen-decomposition of one or a stack of symmetric matrices,
    eigenvalues sorted from largest to smallest.

    Notes:
        Tiny negative eigenvalues from rounding are clipped to zero.

    Args:
        matrices (tensor (..., d, d))

    Returns:
        eigenvalues (tensor (..., d)),
        eigenvectors (tensor (..., d, d)): column j goes with eigenvalue j

    """
    values, vectors = numpy.linalg.eigh(matrices)
    values = numpy.clip(values[..., ::-1], 0, None)
    vectors = vectors[..., ::-1]
    return values, vectors


class PCA(object):

    def __init__(self, mean, components, variances):
        """
        Principal components of a set of points.

        Args:
            mean (tensor (num_units,)): the centroid.
            components (tensor (num_units, num_units)): unit directions
                as columns, by decreasing variance.
            variances (tensor (num_units,)): variance along each direction.

        Returns:
            PCA

        """
        self.mean = mean
        self.W = components
        self.var = variances

    @classmethod
    def from_points(cls, tensor):
        """
        Compute the exact principal components from the covariance matrix.

        Args:
            tensor (num_samples, num_units): at least one sample.

        Returns:
            PCA

        """
        assert len(tensor) > 0, "need at least one sample"
        var, W = eigen_descending(be.scatter_matrix(tensor))
        return cls(numpy.mean(tensor, axis=0), W, var)

    @property
    def principal_direction(self):
        """
        The direction of largest variance.

        """
        return self.W[:, 0]

    @property
    def normal(self):
        """
        The direction of smallest variance; the least-squares plane normal.

        """
        return self.W[:, -1]

    def project(self, tensor):
        """
        Project a tensor onto the principal components.

        Args:
            tensor (num_samples, num_units)

        Returns:
            tensor (num_samples, num_components)

        """
        return numpy.dot(tensor, self.W)

    def transform(self, tensor):
        """
        Transform a tensor by removing the mean and projecting.

        Args:
            tensor (num_samples, num_units)

        Returns:
            tensor (num_samples, num_components)

        """
        return self.project(tensor - self.mean)
