#include "tsg/trainer.hpp"

#include "tsg/ssl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace tsg {

namespace {

constexpr std::uint64_t kShuffleStream = 1ULL << 40;
constexpr std::uint64_t kViewStream = 1ULL << 41;

}  // namespace

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, int batch_size, std::uint64_t seed, int epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng = derive_rng(seed, kShuffleStream + static_cast<std::uint64_t>(epoch));
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    std::vector<std::vector<std::size_t>> batches;
    const auto bs = static_cast<std::size_t>(batch_size);
    for (std::size_t b = 0; b < n; b += bs) {
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b),
                             order.begin() + static_cast<std::ptrdiff_t>(std::min(n, b + bs)));
    }
    if (batches.size() > 1 && batches.back().size() == 1) {
        batches[batches.size() - 2].push_back(batches.back().front());
        batches.pop_back();
    }
    return batches;
}

Trainer::Trainer(Model& model, const std::vector<HeteroGraph>& graphs, const AugmentConfig& augment)
    : model_(model),
      graphs_(graphs),
      augment_(augment),
      optimizer_(model.train.lr, model.train.weight_decay),
      params_(model.trainable()) {
    model.train.validate();
    augment.validate();
    if (graphs.size() < 2) {
        throw ValidationError("training needs at least two graphs");
    }
    steps_per_epoch_ = static_cast<long>(epoch_batches(graphs.size(), model.train.batch_size, 0, 0).size());
}

double Trainer::step(const std::vector<std::size_t>& batch) {
    Rng rng = derive_rng(model_.train.seed, kViewStream + static_cast<std::uint64_t>(step_));
    std::vector<HeteroGraph> v1;
    std::vector<HeteroGraph> v2;
    v1.reserve(batch.size());
    v2.reserve(batch.size());
    for (auto i : batch) {
        v1.push_back(sample_view(graphs_[i], augment_, rng));
        v2.push_back(sample_view(graphs_[i], augment_, rng));
    }
    auto ptrs = [](const std::vector<HeteroGraph>& v) {
        std::vector<const HeteroGraph*> p;
        for (const auto& g : v) p.push_back(&g);
        return p;
    };
    const auto b1 = GraphBatch::build(ptrs(v1));
    const auto b2 = GraphBatch::build(ptrs(v2));

    nn::zero_grads(params_);
    double loss = 0.0;
    try {
        loss = model_.kind == ModelKind::bgrl ? bgrl_step(b1, b2) : graphcl_step(b1, b2);
    } catch (const Error& e) {
        if (e.kind() != "degenerate_embedding") throw;
        loss = std::nan("");
    }
    if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at step " << (step_ + 1) << "; batch ids:";
        for (auto i : batch) msg << ' ' << graphs_[i].scenario_id;
        throw Error("non_finite_loss", msg.str());
    }
    nn::clip_grad_norm(params_, model_.train.grad_clip);
    optimizer_.step(params_);
    ++step_;

    if (model_.kind == ModelKind::bgrl) {
        last_momentum_ = momentum_schedule(step_, total_steps(), model_.train.m_base);
        if (step_ % model_.train.ema_interval == 0) {
            ema_update(model_.target.parameters(), model_.online.parameters(), last_momentum_);
        }
    }
    return loss;
}

double Trainer::bgrl_step(const GraphBatch& v1, const GraphBatch& v2) {
    HeteroEncoder::Tape t1;
    HeteroEncoder::Tape t2;
    const Mat h1 = model_.online.forward(v1, nn::BnMode::train, &t1);
    const Mat h2 = model_.online.forward(v2, nn::BnMode::train, &t2);
    nn::Mlp::Tape pt1;
    nn::Mlp::Tape pt2;
    const Mat p1 = model_.predictor.forward(h1, &pt1);
    const Mat p2 = model_.predictor.forward(h2, &pt2);
    // The target sees batch statistics but never records gradients or
    // running statistics.
    const Mat y1 = model_.target.forward(v1, nn::BnMode::train);
    const Mat y2 = model_.target.forward(v2, nn::BnMode::train);

    const LossGrad lg = bgrl_loss(p1, p2, y1, y2);
    if (!std::isfinite(lg.loss)) return lg.loss;
    const Mat dh1 = model_.predictor.backward(pt1, lg.d_first);
    const Mat dh2 = model_.predictor.backward(pt2, lg.d_second);
    model_.online.backward(t1, v1, dh1);
    model_.online.backward(t2, v2, dh2);
    model_.online.update_running_stats(t1);
    model_.online.update_running_stats(t2);
    return lg.loss;
}

double Trainer::graphcl_step(const GraphBatch& v1, const GraphBatch& v2) {
    HeteroEncoder::Tape t1;
    HeteroEncoder::Tape t2;
    const Mat h1 = model_.online.forward(v1, nn::BnMode::train, &t1);
    const Mat h2 = model_.online.forward(v2, nn::BnMode::train, &t2);
    const Mat z1 = model_.projector.forward(h1);
    const Mat z2 = model_.projector.forward(h2);
    const LossGrad lg = graphcl_loss(z1, z2, model_.train.tau);
    if (!std::isfinite(lg.loss)) return lg.loss;
    model_.online.backward(t1, v1, model_.projector.backward(h1, lg.d_first));
    model_.online.backward(t2, v2, model_.projector.backward(h2, lg.d_second));
    model_.online.update_running_stats(t1);
    model_.online.update_running_stats(t2);
    return lg.loss;
}

std::vector<TrainRecord> Trainer::run(const std::function<void(const TrainRecord&)>& on_step) {
    std::vector<TrainRecord> records;
    for (int epoch = 1; epoch <= model_.train.epochs; ++epoch) {
        for (const auto& batch : epoch_batches(graphs_.size(), model_.train.batch_size, model_.train.seed, epoch)) {
            const double loss = step(batch);
            TrainRecord r{step_, epoch, loss, model_.kind == ModelKind::bgrl ? last_momentum_ : 0.0};
            records.push_back(r);
            if (on_step) on_step(r);
        }
    }
    return records;
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<TrainRecord>& records) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("io_error", "cannot write '" + path.string() + "'");
    out << "step,epoch,loss,momentum\n" << std::setprecision(17);
    for (const auto& r : records) out << r.step << ',' << r.epoch << ',' << r.loss << ',' << r.momentum << '\n';
}

std::vector<double> epoch_mean_losses(const std::vector<TrainRecord>& records) {
    std::vector<double> sum;
    std::vector<int> count;
    for (const auto& r : records) {
        const auto e = static_cast<std::size_t>(r.epoch - 1);
        if (e >= sum.size()) {
            sum.resize(e + 1, 0.0);
            count.resize(e + 1, 0);
        }
        sum[e] += r.loss;
        ++count[e];
    }
    for (std::size_t e = 0; e < sum.size(); ++e) {
        if (count[e] > 0) sum[e] /= count[e];
    }
    return sum;
}

}  // namespace tsg
