#include "tsg/model.hpp"

#include <algorithm>

namespace tsg {

std::string_view to_string(ModelKind k) { return k == ModelKind::bgrl ? "bgrl" : "graphcl"; }

ModelKind parse_model_kind(std::string_view s) {
    if (s == "bgrl") return ModelKind::bgrl;
    if (s == "graphcl") return ModelKind::graphcl;
    throw ValidationError("unknown model kind '" + std::string(s) + "' (expected bgrl or graphcl)");
}

void TrainConfig::validate() const {
    if (epochs <= 0) throw ValidationError("train.epochs must be positive");
    if (batch_size <= 0) throw ValidationError("train.batch_size must be positive");
    if (!(lr > 0.0)) throw ValidationError("train.lr must be positive");
    if (!(weight_decay >= 0.0)) throw ValidationError("train.weight_decay must be >= 0");
    if (!(m_base > 0.0 && m_base < 1.0)) throw ValidationError("train.m_base must lie in (0, 1)");
    if (!(tau > 0.0)) throw ValidationError("train.tau must be positive");
    if (ema_interval <= 0) throw ValidationError("train.ema_interval must be positive");
    if (!(grad_clip > 0.0)) throw ValidationError("train.grad_clip must be positive");
    if (predictor_hidden <= 0) throw ValidationError("train.predictor_hidden must be positive");
}

Model Model::create(ModelKind kind, const BuilderConfig& builder, const TrainConfig& train,
                    const std::vector<std::string>& vocab) {
    builder.validate();
    train.validate();
    Model m;
    m.kind = kind;
    m.builder = builder;
    m.encoder_config = EncoderConfig::for_builder(builder);
    m.train = train;
    m.vocab = vocab;
    Rng rng = derive_rng(train.seed, 0x1417);
    m.online = HeteroEncoder(m.encoder_config, rng);
    const int d = m.encoder_config.embedding_dim;
    if (kind == ModelKind::bgrl) {
        m.target = m.online;
        m.predictor = make_predictor("predictor", d, d, rng, train.predictor_hidden);
    } else {
        m.projector = nn::Linear("projector", d, d, rng);
    }
    return m;
}

std::vector<nn::Param*> Model::trainable() {
    auto out = online.parameters();
    if (kind == ModelKind::bgrl) {
        predictor.collect(out);
    } else {
        projector.collect(out);
    }
    return out;
}

std::vector<std::pair<std::string, nn::Param*>> Model::tensors() {
    std::vector<std::pair<std::string, nn::Param*>> out;
    for (auto* p : online.state()) out.emplace_back("online." + p->name, p);
    if (kind == ModelKind::bgrl) {
        for (auto* p : target.state()) out.emplace_back("target." + p->name, p);
        std::vector<nn::Param*> head;
        predictor.collect(head);
        for (auto* p : head) out.emplace_back(p->name, p);
    } else {
        std::vector<nn::Param*> head;
        projector.collect(head);
        for (auto* p : head) out.emplace_back(p->name, p);
    }
    return out;
}

Mat embed_graphs(const HeteroEncoder& encoder, const std::vector<HeteroGraph>& graphs, std::size_t chunk) {
    Mat out(static_cast<Eigen::Index>(graphs.size()), encoder.config().embedding_dim);
    chunk = std::max<std::size_t>(chunk, 1);
    for (std::size_t begin = 0; begin < graphs.size(); begin += chunk) {
        const std::size_t end = std::min(graphs.size(), begin + chunk);
        std::vector<const HeteroGraph*> part;
        for (std::size_t i = begin; i < end; ++i) part.push_back(&graphs[i]);
        const Mat z = encoder.forward(GraphBatch::build(part), nn::BnMode::eval);
        out.middleRows(static_cast<Eigen::Index>(begin), z.rows()) = normalize_rows(z);
    }
    return out;
}

}  // namespace tsg
