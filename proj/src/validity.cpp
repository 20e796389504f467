#include "tsg/validity.hpp"

#include "tsg/embedding_set.hpp"
#include "tsg/model.hpp"

namespace tsg {

double embedding_validity_rate(const std::vector<HeteroGraph>& graphs, const EmbedFn& embed,
                               const AugmentConfig& augment, std::size_t trials, std::uint64_t seed) {
    if (graphs.size() < 2) throw ValidationError("validity rate needs at least two graphs");
    if (trials == 0) throw ValidationError("validity rate needs at least one trial");
    augment.validate();

    struct Trial {
        std::size_t g1;
        std::size_t g2;
    };
    std::vector<Trial> plan;
    std::vector<HeteroGraph> views;
    plan.reserve(trials);
    views.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng = derive_rng(seed, t);
        const std::size_t g1 = static_cast<std::size_t>(rng() % graphs.size());
        std::size_t g2 = static_cast<std::size_t>(rng() % (graphs.size() - 1));
        if (g2 >= g1) ++g2;
        plan.push_back({g1, g2});
        views.push_back(sample_view(graphs[g1], augment, rng));
    }
    const Mat base = embed(graphs);
    const Mat aug = embed(views);

    std::size_t ok = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const RowVec e1 = base.row(static_cast<Eigen::Index>(plan[t].g1));
        const double d_view = cosine_distance(e1, aug.row(static_cast<Eigen::Index>(t)));
        const double d_other = cosine_distance(e1, base.row(static_cast<Eigen::Index>(plan[t].g2)));
        if (d_view < d_other) ++ok;
    }
    return static_cast<double>(ok) / static_cast<double>(trials);
}

double embedding_validity_rate(const std::vector<HeteroGraph>& graphs, const HeteroEncoder& encoder,
                               const AugmentConfig& augment, std::size_t trials, std::uint64_t seed) {
    const EmbedFn fn = [&encoder](const std::vector<HeteroGraph>& gs) { return embed_graphs(encoder, gs); };
    return embedding_validity_rate(graphs, fn, augment, trials, seed);
}

}  // namespace tsg
