#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <Eigen/Dense>

#include "specdist/rng.hpp"

namespace test_support {

/** Self-deleting temp file path. */
class TempFile {
public:
    explicit TempFile(const std::string& suffix) {
        static int counter = 0;
        path_ = (std::filesystem::temp_directory_path() /
                 ("specdist_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + suffix))
                    .string();
    }
    ~TempFile() { std::error_code ec; std::filesystem::remove(path_, ec); }
    const std::string& path() const { return path_; }
    void write(const std::string& content) const {
        std::ofstream out(path_);
        out << content;
    }

private:
    std::string path_;
};

inline Eigen::VectorXd random_vector(int n, specdist::Rng& rng) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
    return v;
}

inline Eigen::MatrixXd random_matrix(int r, int c, specdist::Rng& rng) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

}  // namespace test_support
