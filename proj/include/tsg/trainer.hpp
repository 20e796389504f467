#pragma once

#include "tsg/augment.hpp"
#include "tsg/model.hpp"

#include <filesystem>
#include <functional>
#include <vector>

namespace tsg {

struct TrainRecord {
    long step = 0;  // 1-based optimizer step
    int epoch = 0;  // 1-based
    double loss = 0.0;
    double momentum = 0.0;  // EMA momentum in effect (BGRL), 0 for GraphCL
};

/// Shuffled mini-batches for one epoch. A trailing batch of a single graph is
/// merged into the previous batch.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, int batch_size, std::uint64_t seed, int epoch);

class Trainer {
public:
    Trainer(Model& model, const std::vector<HeteroGraph>& graphs, const AugmentConfig& augment);

    long steps_per_epoch() const { return steps_per_epoch_; }
    long total_steps() const { return steps_per_epoch_ * model_.train.epochs; }
    long steps_done() const { return step_; }

    /// One optimizer step on the given graph indices. Returns the loss.
    /// Throws Error("non_finite_loss") naming the step and batch ids.
    double step(const std::vector<std::size_t>& batch);

    /// Runs every epoch. `on_step` sees each record as it is produced.
    std::vector<TrainRecord> run(const std::function<void(const TrainRecord&)>& on_step = {});

private:
    double bgrl_step(const GraphBatch& v1, const GraphBatch& v2);
    double graphcl_step(const GraphBatch& v1, const GraphBatch& v2);

    Model& model_;
    const std::vector<HeteroGraph>& graphs_;
    AugmentConfig augment_;
    nn::AdamW optimizer_;
    std::vector<nn::Param*> params_;
    long steps_per_epoch_ = 0;
    long step_ = 0;
    double last_momentum_ = 0.0;
};

void write_loss_csv(const std::filesystem::path& path, const std::vector<TrainRecord>& records);

/// Mean loss per epoch, index 0 = epoch 1.
std::vector<double> epoch_mean_losses(const std::vector<TrainRecord>& records);

}  // namespace tsg
