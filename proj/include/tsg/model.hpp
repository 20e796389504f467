#pragma once

#include "tsg/encoder.hpp"
#include "tsg/graph.hpp"

#include <string>
#include <vector>

namespace tsg {

enum class ModelKind { bgrl, graphcl };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct TrainConfig {
    int epochs = 50;
    int batch_size = 32;
    double lr = 1e-3;
    double weight_decay = 1e-3;
    double m_base = 0.99;
    double tau = 0.5;
    int ema_interval = 10;
    double grad_clip = 5.0;
    int predictor_hidden = 512;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

/// Everything a checkpoint holds. BGRL models carry a target encoder and a
/// predictor; GraphCL models carry the projector.
struct Model {
    ModelKind kind = ModelKind::bgrl;
    BuilderConfig builder;
    EncoderConfig encoder_config;
    TrainConfig train;
    std::vector<std::string> vocab;

    HeteroEncoder online;
    HeteroEncoder target;
    nn::Mlp predictor;
    nn::Linear projector;

    static Model create(ModelKind kind, const BuilderConfig& builder, const TrainConfig& train,
                        const std::vector<std::string>& vocab);

    /// Trainable parameters (online encoder plus head).
    std::vector<nn::Param*> trainable();
    /// Every persisted tensor with a unique, prefixed name.
    std::vector<std::pair<std::string, nn::Param*>> tensors();
};

/// Unit-norm graph embeddings from the online encoder in eval mode, one row
/// per graph.
Mat embed_graphs(const HeteroEncoder& encoder, const std::vector<HeteroGraph>& graphs, std::size_t chunk = 64);

}  // namespace tsg
