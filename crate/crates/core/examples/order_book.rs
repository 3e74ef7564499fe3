//! Resting limit orders, a crossing limit order and a market order against a
//! small book, printing the depth after each event.

use switchmarket::book::{Order, OrderBook, Price, Side};

fn show(book: &OrderBook) {
    for side in [Side::Sell, Side::Buy] {
        let levels: Vec<String> = book.depth(side).iter().map(|(id, agent, p)| format!("#{id}/a{agent}@{}", p.ticks())).collect();
        println!("  {side:?}: {}", levels.join(" "));
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut book = OrderBook::new();
    let tick = 0.01;
    let px = |cents: i64| Price::from_ticks(cents);

    book.submit_limit(Order::limit(1, 0, Side::Buy, px(1998)?))?;
    book.submit_limit(Order::limit(2, 1, Side::Buy, px(1999)?))?;
    book.submit_limit(Order::limit(3, 2, Side::Sell, px(2003)?))?;
    book.submit_limit(Order::limit(4, 3, Side::Sell, px(2003)?))?;
    println!("after four resting orders:");
    show(&book);

    // a buy limit at 20.05 crosses the oldest ask at 20.03
    if let Some(t) = book.submit_limit(Order::limit(5, 4, Side::Buy, px(2005)?))? {
        println!("limit buy filled at {:.2} against order #{}", t.price.to_currency(tick), t.sell_order);
    }
    let t = book.submit_market(Order::market(6, 5, Side::Sell))?;
    println!("market sell filled at {:.2} against order #{}", t.price.to_currency(tick), t.buy_order);
    show(&book);

    println!("agent 3 cancels {} order(s)", book.cancel_agent_orders(3));
    show(&book);
    let c = book.counters();
    println!("submitted {}, executed {}, cancelled {}, resting {}", c.submitted, c.executed, c.cancelled, book.resting_len());
    Ok(())
}
