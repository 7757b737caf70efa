#pragma once

#include <vector>

#include "smen/backbone.hpp"
#include "smen/tensorseq.hpp"

namespace smen {

struct LossWeights {
  double lambda1 = 1.0;  // attention guide
  double lambda2 = 0.1;  // feature separation
  double lambda3 = 0.1;  // attention sparsity
  double beta = 0.5;     // slow-branch share of the fused separation loss
  double margin = 1.0;   // hinge margin on unit-normalized branch embeddings
};

/// Video-level targets for the three attention branches. Instance drops the
/// background bit, context keeps both, background keeps only background.
struct BranchTargets {
  std::vector<double> y_ins;
  std::vector<double> y_con;
  std::vector<double> y_bac;
};

BranchTargets build_branch_targets(const VideoLabel& label);

/// Mean binary cross-entropy; predictions are clamped to
/// [1e-12, 1 - 1e-12] before the logs.
double bce(const std::vector<double>& pred, const std::vector<double>& target);

/// Sum of the three branch BCE losses on attention-weighted video scores.
double classification_loss(const BackboneOutput& out, const VideoLabel& label,
                           double topk_ratio);

/// Mean absolute gap between the background attention weight and the
/// background probability of the CAS row.
double guide_loss(const Cas& cas, const AttentionTriple& attn);

/// Hinge on pairwise distances between the unit-normalized attention-weighted
/// mean embeddings of the three branches.
double feature_separation_loss(const Matrix& embedded, const AttentionTriple& attn,
                               double margin);

/// Mean instance-attention weight; pushing it down keeps attention sparse.
double sparsity_loss(const AttentionTriple& attn);

double total_loss(const BackboneOutput& out, const VideoLabel& label,
                  const LossWeights& weights, double topk_ratio);

/// Convex combination (1-beta) * normal + beta * slow.
double fused_feature_loss(double l_feat_normal, double l_feat_slow, double beta);

/// Analytic gradients of total_loss with respect to every backbone
/// parameter. Top-k pooling routes gradient only to the selected snippets,
/// ties broken toward the lowest index.
BackboneParams backward(const BackboneParams& params, const FeatureSequence& x,
                        const BackboneOutput& out, const VideoLabel& label,
                        const LossWeights& weights, double topk_ratio);

/// Indices of the k largest entries, ordered by value descending with ties
/// broken by lowest index.
std::vector<int> topk_indices(const std::vector<double>& v, int k);

}  // namespace smen
