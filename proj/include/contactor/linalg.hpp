#ifndef CONTACTOR_LINALG_HPP
#define CONTACTOR_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace contactor {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct SingularValues {
    double min = 0.0;
    double max = 0.0;
    int rank = 0;  // relative threshold rel_tol * max
};

inline SingularValues singular_values(const Mat& m, double rel_tol = 1e-10) {
    SingularValues out;
    if (m.rows() == 0 || m.cols() == 0)
        return out;
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& s = svd.singularValues();
    out.max = s(0);
    out.min = s(s.size() - 1);
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * out.max)
            ++out.rank;
    return out;
}

} // namespace contactor

#endif
