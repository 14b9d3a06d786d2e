#pragma once

#include <vector>

#include "eegdec/model.hpp"

// Internal seams between model.cpp and the learner translation units.
// Everything here operates on already-standardized feature matrices.
namespace eegdec::learn::detail {

SvmModel train_svm_ovo(const Matrix& x_std, const std::vector<int>& y, int n_classes,
                       const SvmConfig& cfg, double gamma);

// Votes per row with pairwise machines; ties fall back to summed signed
// decision values, then to the lowest class. scores_out (n x n_classes)
// receives the summed signed decision values.
std::vector<int> svm_vote(const SvmModel& model, const Matrix& x_std, int n_classes,
                          Matrix* scores_out);

GbtModel train_gbt(const Matrix& x_std, const std::vector<int>& y, int n_classes,
                   const GbtConfig& cfg);

// Raw additive scores (n x K): init_scores + learning_rate * sum of trees.
Matrix gbt_raw_scores(const GbtModel& model, const Matrix& x_std);

Matrix softmax_rows(const Matrix& raw);

}  // namespace eegdec::learn::detail
