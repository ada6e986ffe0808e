// Build the synthetic panel in memory, run the fixed-income strategy and
// print its annualized panel.

#include <iostream>

#include "trendfolio/trendfolio.hpp"

int main() {
    using namespace trendfolio;
    auto ds = synthetic::generate();
    std::vector<std::pair<AssetMeta, PriceSeries>> assets;
    for (std::size_t i = 0; i < ds.assets.size(); ++i)
        assets.emplace_back(ds.universe[i], ds.assets[i]);
    auto panel = align_panel(assets, ds.benchmarks);

    StrategyConfig cfg;
    cfg.name = "fixed_income";
    cfg.asset_classes = {AssetClass::FixedIncome};
    cfg.benchmark_id = "AGG";

    auto result = run_backtest(cfg, panel);
    std::cout << result.name << " from " << result.inception.iso() << ", " << result.rebalances.size()
              << " rebalances\n";
    write_metric_panel(std::cout, compute_metric_panel(result));
    return 0;
}
