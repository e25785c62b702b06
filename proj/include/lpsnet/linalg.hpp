#pragma once

#include "lpsnet/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace lpsnet
{
    using Vector = Eigen::VectorXd;
    using Matrix = Eigen::MatrixXd;

    // Reciprocal condition estimate below this counts as singular.
    inline constexpr double kSingularRcond = 1e-12;

    // LU with partial pivoting that refuses (near-)singular systems.
    class CheckedLu
    {
    public:
        CheckedLu(const Matrix &a, std::string what)
            : lu_(a)
        {
            const double min_pivot = a.rows() == 0 ? 0.0 : lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
            rcond_ = lu_.rcond();
            if (!(min_pivot > 0.0) || !(rcond_ >= kSingularRcond))
                throw SingularMatrixError(what + " singular");
        }

        [[nodiscard]] Vector solve(const Vector &b) const { return lu_.solve(b); }
        [[nodiscard]] Matrix inverse() const { return lu_.inverse(); }
        [[nodiscard]] double rcond() const noexcept { return rcond_; }

    private:
        Eigen::PartialPivLU<Matrix> lu_;
        double rcond_ = 0.0;
    };

    inline bool is_singular(const Matrix &a)
    {
        try
        {
            CheckedLu lu(a, "matrix");
            return false;
        }
        catch (const SingularMatrixError &)
        {
            return true;
        }
    }

    inline bool all_finite(const Vector &v)
    {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (!std::isfinite(v[i]))
                return false;
        return true;
    }
} // namespace lpsnet
