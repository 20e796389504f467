#include "tsg/projection.hpp"

#include <Eigen/Eigenvalues>

#include <fstream>
#include <iomanip>

namespace tsg {

Mat pca_2d(const Mat& x) {
    if (x.rows() < 1 || x.cols() < 2) throw ValidationError("pca_2d needs at least one row and two columns");
    const RowVec mean = x.colwise().mean();
    const Mat centered = x.rowwise() - mean;
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / std::max<double>(1.0, x.rows() - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const auto d = cov.cols();
    Eigen::MatrixXd basis(d, 2);
    for (int k = 0; k < 2; ++k) {
        Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - k);  // ascending eigenvalues
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        basis.col(k) = v;
    }
    return centered * basis;
}

void write_scatter_svg(const std::filesystem::path& path, const Mat& points, const std::vector<int>& assignment,
                       const std::string& title) {
    if (points.cols() != 2 || static_cast<std::size_t>(points.rows()) != assignment.size()) {
        throw ShapeError("scatter plot expects N x 2 points and N assignments");
    }
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#bcbd22", "#17becf", "#393b79"};
    const double w = 640;
    const double h = 640;
    const double margin = 40;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (points.rows() > 0) {
        x0 = points.col(0).minCoeff();
        x1 = points.col(0).maxCoeff();
        y0 = points.col(1).minCoeff();
        y1 = points.col(1).maxCoeff();
    }
    const double sx = (w - 2 * margin) / std::max(x1 - x0, 1e-12);
    const double sy = (h - 2 * margin) / std::max(y1 - y0, 1e-12);

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("io_error", "cannot write '" + path.string() + "'");
    out << std::fixed << std::setprecision(2);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << margin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title
        << "</text>\n";
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const int c = assignment[static_cast<std::size_t>(i)];
        const char* colour = c < 0 ? "#bbbbbb" : palette[c % 10];
        out << "<circle cx=\"" << margin + (points(i, 0) - x0) * sx << "\" cy=\""
            << h - margin - (points(i, 1) - y0) * sy << "\" r=\"2.5\" fill=\"" << colour << "\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace tsg
