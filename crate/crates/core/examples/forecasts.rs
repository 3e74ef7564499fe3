//! Forecast rules and order classification for each trader type on one
//! market snapshot, plus a few steps of a switcher's buy-or-not decision.

use switchmarket::agents::{
    decide_order, predict_informed, predict_uninformed, predict_zero_intelligence, switcher_decide, MarketView,
    PredictorCoeffs, SwitcherState,
};
use switchmarket::book::Price;
use switchmarket::rng::{stream, Stream};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (tick, mu) = (0.01, 0.04);
    let view = MarketView { v_now: 20.40, v_lagged: 19.80, p_ave: 20.05, p_mid: 20.10, p_prev: 20.08, step: 10 };
    let bid = Some(Price::from_ticks(2008)?);
    let ask = Some(Price::from_ticks(2012)?);
    let mut rng = stream(1, Stream::Agent(0));

    let coeffs = PredictorCoeffs::new(0.2, 0.3, 0.5)?;
    let rows = [
        ("informed", predict_informed(&view)),
        ("uninformed (0.2, 0.3, 0.5)", predict_uninformed(&coeffs, &view)?),
        ("zero intelligence", predict_zero_intelligence(&mut rng, &view)),
    ];
    for (name, prediction) in rows {
        let decision = decide_order(prediction, bid, ask, mu, tick, &mut rng);
        println!("{name:<28} forecast {prediction:.4} -> {decision:?}");
    }

    // the switcher buys when last step's forecast missed by at least the cost
    let mut state = SwitcherState::new(coeffs, 0.05);
    let prices = [20.08, 20.30, 20.31, 20.10, 20.12];
    for (k, &p_prev) in prices.iter().enumerate() {
        let v = MarketView { p_prev, step: k as u64, ..view };
        let d = switcher_decide(&mut state, &v);
        println!("step {k}: previous price {p_prev:.2}, informed {}, forecast {:.4}", d.informed, d.prediction);
    }
    Ok(())
}
